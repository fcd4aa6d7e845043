#include "l2wave/rdist.hpp"

#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace l2wave {

std::uint64_t DistanceHistogram::total() const {
    std::uint64_t sum = overflow + infinite;
    for (auto c : counts) sum += c;
    return sum;
}

namespace {

class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}

    void add(std::size_t pos, std::int64_t delta) {
        for (std::size_t i = pos + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
    }

    // Sum over [0, pos).
    std::int64_t prefix(std::size_t pos) const {
        std::int64_t sum = 0;
        for (std::size_t i = pos; i > 0; i -= i & (~i + 1)) sum += tree_[i];
        return sum;
    }

private:
    std::vector<std::int64_t> tree_;
};

void bump(DistanceHistogram& h, std::uint64_t distance) {
    if (distance >= h.exact_limit) {
        ++h.overflow;
        return;
    }
    if (distance >= h.counts.size()) h.counts.resize(distance + 1, 0);
    ++h.counts[distance];
}

}  // namespace

DistanceHistogram stack_distances(std::span<const std::uint64_t> sectors, std::uint64_t exact_limit) {
    DistanceHistogram h;
    h.exact_limit = exact_limit;
    Fenwick marked(sectors.size());
    std::unordered_map<std::uint64_t, std::size_t> last;
    last.reserve(sectors.size());
    for (std::size_t now = 0; now < sectors.size(); ++now) {
        auto [it, first] = last.try_emplace(sectors[now], now);
        if (first) {
            ++h.infinite;
        } else {
            const std::size_t prev = it->second;
            // Every marked position strictly between prev and now is the
            // latest access of a distinct sector.
            bump(h, static_cast<std::uint64_t>(marked.prefix(now) - marked.prefix(prev + 1)));
            marked.add(prev, -1);
            it->second = now;
        }
        marked.add(now, 1);
    }
    return h;
}

DistanceHistogram stack_distances(std::span<const SectorAccess> trace, std::uint64_t exact_limit) {
    std::vector<std::uint64_t> sectors(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) sectors[i] = trace[i].sector;
    return stack_distances(sectors, exact_limit);
}

DistanceHistogram stack_distances_naive(std::span<const std::uint64_t> sectors, std::uint64_t exact_limit) {
    DistanceHistogram h;
    h.exact_limit = exact_limit;
    std::unordered_set<std::uint64_t> between;
    for (std::size_t now = 0; now < sectors.size(); ++now) {
        between.clear();
        bool reused = false;
        for (std::size_t back = now; back-- > 0;) {
            if (sectors[back] == sectors[now]) {
                reused = true;
                break;
            }
            between.insert(sectors[back]);
        }
        if (reused) bump(h, between.size()); else ++h.infinite;
    }
    return h;
}

std::uint64_t misses_at_capacity(const DistanceHistogram& hist, std::uint64_t capacity_sectors) {
    if (capacity_sectors > hist.exact_limit && hist.overflow != 0)
        throw std::domain_error("capacity exceeds the histogram's exact distance limit");
    std::uint64_t misses = hist.infinite + hist.overflow;
    for (std::uint64_t d = capacity_sectors; d < hist.counts.size(); ++d) misses += hist.counts[d];
    return misses;
}

}  // namespace l2wave
