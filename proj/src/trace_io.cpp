#include "l2wave/trace_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace l2wave {

namespace {

void put_le(unsigned char* out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint64_t get_le(const unsigned char* in, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return v;
}

}  // namespace

void encode_record(const SectorAccess& a, unsigned char* out) {
    if (a.cta > 0xffff) throw std::out_of_range("CTA index " + std::to_string(a.cta) + " does not fit 16 bits");
    put_le(out, static_cast<std::uint8_t>(a.tensor), 1);
    put_le(out + 1, static_cast<std::uint8_t>(a.kind), 1);
    put_le(out + 2, a.cta, 2);
    put_le(out + 4, a.wave, 4);
    put_le(out + 8, a.sector, 8);
}

SectorAccess decode_record(const unsigned char* in) {
    const auto tensor = get_le(in, 1);
    const auto kind = get_le(in + 1, 1);
    if (tensor > 3) throw std::runtime_error("dump record has invalid tensor " + std::to_string(tensor));
    if (kind > 1) throw std::runtime_error("dump record has invalid kind " + std::to_string(kind));
    return {static_cast<Tensor>(tensor), static_cast<AccessKind>(kind), static_cast<std::uint32_t>(get_le(in + 2, 2)),
            static_cast<std::uint32_t>(get_le(in + 4, 4)), get_le(in + 8, 8)};
}

void DumpWriter::write(const SectorAccess& a) {
    unsigned char rec[kDumpRecordBytes];
    encode_record(a, rec);
    out_.write(reinterpret_cast<const char*>(rec), kDumpRecordBytes);
    ++records_;
}

void DumpWriter::on_tile(const TileAccess& a) {
    for (std::uint64_t s = 0; s < a.n_sectors; ++s) write({a.tensor, a.kind, a.cta, a.wave, a.first_sector + s});
}

void write_dump(std::ostream& out, std::span<const SectorAccess> trace) {
    DumpWriter w(out);
    for (const auto& a : trace) w.write(a);
}

std::vector<SectorAccess> read_dump(std::istream& in) {
    std::vector<SectorAccess> trace;
    unsigned char rec[kDumpRecordBytes];
    for (;;) {
        in.read(reinterpret_cast<char*>(rec), kDumpRecordBytes);
        const auto got = static_cast<std::size_t>(in.gcount());
        if (got == 0) break;
        if (got != kDumpRecordBytes) throw std::runtime_error("truncated dump record");
        trace.push_back(decode_record(rec));
    }
    return trace;
}

std::vector<SectorAccess> read_dump_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace dump '" + path + "'");
    return read_dump(in);
}

nlohmann::json sidecar_json(const ExperimentSpec& spec, const TensorTotals& totals) {
    return {{"format", {{"record_bytes", kDumpRecordBytes},
                        {"endianness", "little"},
                        {"fields", {"tensor:u8", "kind:u8", "cta:u16", "wave:u32", "sector_id:u64"}}}},
            {"tool_version", kToolVersion},
            {"spec_hash", spec_hash(spec)},
            {"spec", to_json(spec)},
            {"totals", to_json(totals)}};
}

std::string totals_csv(const TensorTotals& totals) {
    std::string out = "tensor,sectors\n";
    for (int t = 0; t < kNumTensors; ++t)
        out += std::string(to_string(static_cast<Tensor>(t))) + "," + std::to_string(totals.sectors[t]) + "\n";
    out += "total," + std::to_string(totals.total()) + "\n";
    return out;
}

std::string histogram_csv(const DistanceHistogram& hist) {
    std::string out = "distance,count\n";
    for (std::size_t d = 0; d < hist.counts.size(); ++d)
        if (hist.counts[d]) out += std::to_string(d) + "," + std::to_string(hist.counts[d]) + "\n";
    if (hist.overflow) out += ">=" + std::to_string(hist.exact_limit) + "," + std::to_string(hist.overflow) + "\n";
    out += "inf," + std::to_string(hist.infinite) + "\n";
    return out;
}

nlohmann::json histogram_json(const DistanceHistogram& hist) {
    nlohmann::json buckets = nlohmann::json::array();
    for (std::size_t d = 0; d < hist.counts.size(); ++d)
        if (hist.counts[d]) buckets.push_back({d, hist.counts[d]});
    return {{"exact_limit", hist.exact_limit}, {"buckets", buckets},       {"overflow", hist.overflow},
            {"infinite", hist.infinite},       {"total", hist.total()}};
}

}  // namespace l2wave
