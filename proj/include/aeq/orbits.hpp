#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "aeq/group_action.hpp"

namespace aeq {

/// A fully connected bipartite layer with n_in inputs and n_out outputs.
/// Edge (n, m) lives at flat index n * n_out + m (row-major by input node).
struct LayerShape {
    std::size_t n_in = 0;
    std::size_t n_out = 0;

    std::size_t edge_count() const { return n_in * n_out; }
    static LayerShape of(std::size_t n_in, std::size_t n_out);

    bool operator==(const LayerShape&) const = default;
};

inline std::size_t edge_index(const LayerShape& s, std::size_t n, std::size_t m) {
    return n * s.n_out + m;
}

/// The paired action of a group on a layer's edges: element g maps edge
/// (n, m) to (in(g)(n), out(g)(m)).
class EdgeAction {
public:
    const GroupAction& in() const { return in_; }
    const GroupAction& out() const { return out_; }
    const PermGroup& group() const { return in_.group(); }
    LayerShape shape() const { return shape_; }
    const std::vector<Perm>& edge_perms() const { return edges_.perms(); }
    const GroupAction& edges() const { return edges_; }

private:
    friend EdgeAction build_edge_action(const LayerShape&, const GroupAction&, const GroupAction&);
    EdgeAction(LayerShape shape, GroupAction in, GroupAction out, GroupAction edges)
        : shape_(shape), in_(std::move(in)), out_(std::move(out)), edges_(std::move(edges)) {}

    LayerShape shape_;
    GroupAction in_;
    GroupAction out_;
    GroupAction edges_;
};

/// Derives the edge permutations from node actions over the same group.
/// Throws ValidationError on group or size mismatch.
EdgeAction build_edge_action(const LayerShape& shape, const GroupAction& in_action,
                             const GroupAction& out_action);

/// assignment[i] = orbit id of index i; ids are contiguous in [0, orbit_count)
/// and appear in order of each orbit's smallest member.
struct OrbitPartition {
    std::vector<std::uint32_t> assignment;
    std::uint32_t orbit_count = 0;

    std::size_t size() const { return assignment.size(); }

    /// Relabels arbitrary (possibly gappy) ids into canonical form.
    static OrbitPartition canonicalize(const std::vector<std::uint32_t>& raw_ids);

    /// Singleton partition: every index its own orbit.
    static OrbitPartition singletons(std::size_t n);

    /// Checks contiguity, full coverage, and canonical label order.
    void validate() const;

    std::vector<std::size_t> orbit_sizes() const;

    bool operator==(const OrbitPartition&) const = default;
};

/// Result of one orbit computation: the canonical partition, the raw ids as
/// the traversal produced them, and the exact number of group-element
/// applications performed.
struct OrbitRun {
    OrbitPartition partition;
    std::vector<std::uint32_t> raw_assignment;
    std::uint64_t group_applications = 0;
};

inline std::uint64_t count_group_applications(const OrbitRun& run) {
    return run.group_applications;
}

/// Baseline construction: every index stamps a fresh id onto its full orbit
/// under all elements; later stamps overwrite earlier ones, and
/// canonicalization compacts the surviving ids. Costs exactly
/// |elements| * domain applications.
OrbitRun orbits_by_full_scan(std::size_t domain, const std::vector<Perm>& elements);

/// Frontier construction: indices are popped from a queue once each and
/// expanded through every element of every listed action, so the cost is
/// (sum of action orders) * domain applications.
OrbitRun orbits_by_frontier(std::size_t domain, const std::vector<const std::vector<Perm>*>& actions);

/// Baseline on a layer's edge set.
OrbitRun orbits_basic(const LayerShape& shape, const EdgeAction& action);

/// Frontier construction over several edge actions on the same layer; equals
/// the baseline run on the closure group generated by all of them.
OrbitRun orbits_fast(const LayerShape& shape, std::span<const EdgeAction> actions);

/// Finest common coarsening of two partitions of the same index set
/// (union-find over co-membership), canonicalized.
OrbitPartition refine_merge(const OrbitPartition& p, const OrbitPartition& q);

/// Binary partition file: magic "ORB1", u64 LE edge count, u64 LE orbit
/// count, then one u32 LE id per index.
void save_partition(const OrbitPartition& p, const std::filesystem::path& path);
OrbitPartition load_partition(const std::filesystem::path& path);

void save_partition_json(const OrbitPartition& p, const std::filesystem::path& path);
OrbitPartition load_partition_json(const std::filesystem::path& path);

/// A component group paired with its node actions on both sides of a layer.
struct PairedGroup {
    GroupPtr group;
    GroupAction in;
    GroupAction out;
};

/// Closes generator pairs (acting on n_in and n_out respectively) into one
/// group acting on both domains, realized block-diagonally on n_in + n_out.
PairedGroup close_paired(const std::vector<std::pair<Perm, Perm>>& generator_pairs,
                         std::size_t n_in, std::size_t n_out, const GroupLimits& limits = {});

}  // namespace aeq
