#pragma once

#include <algorithm>
#include <cstdint>
#include <set>

namespace dtn {

/// Per-agent constraints imposed by the conflict tree. Transit vertices and transit edges
/// are identified by global stop-event index; an edge is named by its tail stop.
struct ConstraintSet {
    std::set<std::uint32_t> forbidden_boardings;
    std::set<std::uint32_t> excluded_edges;

    bool may_board(std::uint32_t stop) const { return !forbidden_boardings.contains(stop); }
    bool may_ride(std::uint32_t edge_tail) const { return !excluded_edges.contains(edge_tail); }
    bool empty() const { return forbidden_boardings.empty() && excluded_edges.empty(); }
    std::size_t size() const { return forbidden_boardings.size() + excluded_edges.size(); }

    bool includes(const ConstraintSet& other) const {
        return std::includes(forbidden_boardings.begin(), forbidden_boardings.end(),
                             other.forbidden_boardings.begin(), other.forbidden_boardings.end()) &&
               std::includes(excluded_edges.begin(), excluded_edges.end(), other.excluded_edges.begin(),
                             other.excluded_edges.end());
    }

    friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

}  // namespace dtn
