#pragma once

// Binary trace dumps and small export formats.
//
// Dump record, 16 bytes, little-endian:
//   u8 tensor (0=Q 1=K 2=V 3=O) | u8 kind (0=read 1=write) | u16 cta |
//   u32 wave | u64 sector_id

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "l2wave/experiment.hpp"
#include "l2wave/rdist.hpp"
#include "l2wave/trace.hpp"

namespace l2wave {

inline constexpr std::size_t kDumpRecordBytes = 16;

void encode_record(const SectorAccess& a, unsigned char* out);
SectorAccess decode_record(const unsigned char* in);

// Streams a generated trace straight to a dump. Throws std::out_of_range if a
// CTA index does not fit the 16-bit field.
class DumpWriter : public TileVisitor {
public:
    explicit DumpWriter(std::ostream& out) : out_(out) {}
    void on_tile(const TileAccess& a) override;
    void write(const SectorAccess& a);
    std::uint64_t records() const { return records_; }

private:
    std::ostream& out_;
    std::uint64_t records_ = 0;
};

void write_dump(std::ostream& out, std::span<const SectorAccess> trace);
std::vector<SectorAccess> read_dump(std::istream& in);
std::vector<SectorAccess> read_dump_file(const std::string& path);

nlohmann::json sidecar_json(const ExperimentSpec& spec, const TensorTotals& totals);
std::string totals_csv(const TensorTotals& totals);

std::string histogram_csv(const DistanceHistogram& hist);
nlohmann::json histogram_json(const DistanceHistogram& hist);

}  // namespace l2wave
