#include "aeq/orbits.hpp"

#include <cstring>
#include <deque>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "aeq/errors.hpp"

namespace aeq {

LayerShape LayerShape::of(std::size_t n_in, std::size_t n_out) {
    if (n_in == 0 || n_out == 0) {
        throw ValidationError("layer shape sides must be positive");
    }
    return LayerShape{n_in, n_out};
}

EdgeAction build_edge_action(const LayerShape& shape, const GroupAction& in_action,
                             const GroupAction& out_action) {
    if (in_action.group_ptr() != out_action.group_ptr()) {
        throw ValidationError("edge action requires node actions over the same group");
    }
    if (in_action.domain_size() != shape.n_in || out_action.domain_size() != shape.n_out) {
        throw ValidationError("node action domains do not match the layer shape");
    }
    const std::size_t order = in_action.group().order();
    std::vector<Perm> edge_perms;
    edge_perms.reserve(order);
    for (std::size_t g = 0; g < order; ++g) {
        const Perm& pin = in_action.perm(g);
        const Perm& pout = out_action.perm(g);
        Perm e;
        e.map.resize(shape.edge_count());
        for (std::size_t n = 0; n < shape.n_in; ++n) {
            const std::size_t img_base = static_cast<std::size_t>(pin.map[n]) * shape.n_out;
            std::uint32_t* row = e.map.data() + n * shape.n_out;
            for (std::size_t m = 0; m < shape.n_out; ++m) {
                row[m] = static_cast<std::uint32_t>(img_base + pout.map[m]);
            }
        }
        edge_perms.push_back(std::move(e));
    }
    GroupAction edges =
        GroupAction::create(in_action.group_ptr(), std::move(edge_perms), {}, ActionCheck::Spot);
    return EdgeAction(shape, in_action, out_action, std::move(edges));
}

OrbitPartition OrbitPartition::canonicalize(const std::vector<std::uint32_t>& raw_ids) {
    constexpr std::uint32_t kUnset = 0xffffffffu;
    std::uint32_t max_id = 0;
    for (std::uint32_t id : raw_ids) max_id = std::max(max_id, id);
    std::vector<std::uint32_t> relabel(static_cast<std::size_t>(max_id) + 1, kUnset);

    OrbitPartition p;
    p.assignment.resize(raw_ids.size());
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < raw_ids.size(); ++i) {
        std::uint32_t& slot = relabel[raw_ids[i]];
        if (slot == kUnset) slot = next++;
        p.assignment[i] = slot;
    }
    p.orbit_count = next;
    return p;
}

OrbitPartition OrbitPartition::singletons(std::size_t n) {
    OrbitPartition p;
    p.assignment.resize(n);
    std::iota(p.assignment.begin(), p.assignment.end(), 0u);
    p.orbit_count = static_cast<std::uint32_t>(n);
    return p;
}

void OrbitPartition::validate() const {
    if (assignment.empty() || orbit_count == 0) {
        throw ValidationError("partition is empty");
    }
    std::vector<bool> present(orbit_count, false);
    std::uint32_t next_new = 0;
    for (std::uint32_t id : assignment) {
        if (id >= orbit_count) {
            throw ValidationError("partition id " + std::to_string(id) + " out of range");
        }
        if (!present[id]) {
            if (id != next_new) {
                throw ValidationError("partition labels are not in canonical order");
            }
            present[id] = true;
            ++next_new;
        }
    }
    if (next_new != orbit_count) {
        throw ValidationError("partition has unused orbit ids");
    }
}

std::vector<std::size_t> OrbitPartition::orbit_sizes() const {
    std::vector<std::size_t> sizes(orbit_count, 0);
    for (std::uint32_t id : assignment) ++sizes[id];
    return sizes;
}

OrbitRun orbits_by_full_scan(std::size_t domain, const std::vector<Perm>& elements) {
    for (const Perm& p : elements) {
        if (p.degree() != domain) {
            throw ValidationError("element degree does not match the orbit domain");
        }
    }
    OrbitRun run;
    run.raw_assignment.assign(domain, 0);
    std::uint32_t next_id = 0;
    // Every index stamps its whole orbit; the last stamp wins and
    // canonicalization compacts the surviving ids afterwards.
    for (std::size_t i = 0; i < domain; ++i) {
        const std::uint32_t c = next_id++;
        for (const Perm& p : elements) {
            run.raw_assignment[p.map[i]] = c;
            ++run.group_applications;
        }
    }
    run.partition = OrbitPartition::canonicalize(run.raw_assignment);
    return run;
}

OrbitRun orbits_by_frontier(std::size_t domain,
                            const std::vector<const std::vector<Perm>*>& actions) {
    if (actions.empty()) {
        throw ValidationError("frontier orbit construction needs at least one action");
    }
    for (const auto* perms : actions) {
        for (const Perm& p : *perms) {
            if (p.degree() != domain) {
                throw ValidationError("action degree does not match the orbit domain");
            }
        }
    }

    OrbitRun run;
    run.raw_assignment.assign(domain, 0);
    std::vector<bool> visited(domain, false);
    std::deque<std::uint32_t> queue;
    std::uint32_t next_orbit = 0;

    for (std::size_t i = 0; i < domain; ++i) {
        if (visited[i]) continue;
        visited[i] = true;
        queue.push_back(static_cast<std::uint32_t>(i));
        const std::uint32_t current = next_orbit++;
        while (!queue.empty()) {
            const std::uint32_t index = queue.front();
            queue.pop_front();
            run.raw_assignment[index] = current;
            for (const auto* perms : actions) {
                for (const Perm& p : *perms) {
                    const std::uint32_t image = p.map[index];
                    ++run.group_applications;
                    if (!visited[image]) {
                        visited[image] = true;
                        queue.push_back(image);
                        run.raw_assignment[image] = current;
                    }
                }
            }
        }
    }

    run.partition = OrbitPartition::canonicalize(run.raw_assignment);
    return run;
}

OrbitRun orbits_basic(const LayerShape& shape, const EdgeAction& action) {
    if (action.shape() != shape) {
        throw ValidationError("edge action does not match the layer shape");
    }
    return orbits_by_full_scan(shape.edge_count(), action.edge_perms());
}

OrbitRun orbits_fast(const LayerShape& shape, std::span<const EdgeAction> actions) {
    if (actions.empty()) {
        throw ValidationError("orbits_fast needs a non-empty action list");
    }
    std::vector<const std::vector<Perm>*> lists;
    lists.reserve(actions.size());
    for (const EdgeAction& a : actions) {
        if (a.shape() != shape) {
            throw ValidationError("edge actions disagree on the layer shape");
        }
        lists.push_back(&a.edge_perms());
    }
    return orbits_by_frontier(shape.edge_count(), lists);
}

namespace {

struct UnionFind {
    std::vector<std::uint32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0u);
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) { parent[find(a)] = find(b); }
};

}  // namespace

OrbitPartition refine_merge(const OrbitPartition& p, const OrbitPartition& q) {
    if (p.size() != q.size()) {
        throw ValidationError("refine_merge requires partitions of equal length");
    }
    const std::size_t n = p.size();
    UnionFind uf(n);
    auto link_by = [&](const OrbitPartition& part) {
        std::vector<std::uint32_t> first(part.orbit_count, 0xffffffffu);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t& f = first[part.assignment[i]];
            if (f == 0xffffffffu) {
                f = static_cast<std::uint32_t>(i);
            } else {
                uf.unite(static_cast<std::uint32_t>(i), f);
            }
        }
    };
    link_by(p);
    link_by(q);

    std::vector<std::uint32_t> roots(n);
    for (std::size_t i = 0; i < n; ++i) roots[i] = uf.find(static_cast<std::uint32_t>(i));
    return OrbitPartition::canonicalize(roots);
}

namespace {

constexpr char kMagic[4] = {'O', 'R', 'B', '1'};

void write_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint64_t read_u64_le(std::istream& in, std::size_t offset) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) {
        throw ParseError("partition file truncated", offset);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

std::uint32_t read_u32_le(std::istream& in, std::size_t offset) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4)) {
        throw ParseError("partition file truncated", offset);
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

void save_partition(const OrbitPartition& p, const std::filesystem::path& path) {
    p.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write partition file: " + path.string());
    out.write(kMagic, 4);
    write_u64_le(out, p.assignment.size());
    write_u64_le(out, p.orbit_count);
    for (std::uint32_t id : p.assignment) write_u32_le(out, id);
    if (!out) throw Error("failed writing partition file: " + path.string());
}

OrbitPartition load_partition(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open partition file: " + path.string());
    char magic[4];
    if (!in.read(magic, 4)) throw ParseError("partition file truncated", 0);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw ParseError("wrong magic for partition file", 0);
    }
    const std::uint64_t n = read_u64_le(in, 4);
    const std::uint64_t c = read_u64_le(in, 12);
    if (n == 0 || n > (1ull << 32) || c > n) {
        throw ParseError("partition header is inconsistent", 4);
    }
    OrbitPartition p;
    p.assignment.resize(static_cast<std::size_t>(n));
    p.orbit_count = static_cast<std::uint32_t>(c);
    for (std::size_t i = 0; i < n; ++i) {
        p.assignment[i] = read_u32_le(in, 20 + 4 * i);
    }
    p.validate();
    return p;
}

void save_partition_json(const OrbitPartition& p, const std::filesystem::path& path) {
    p.validate();
    nlohmann::json j;
    j["edge_count"] = p.assignment.size();
    j["orbit_count"] = p.orbit_count;
    j["assignment"] = p.assignment;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write partition file: " + path.string());
    out << j.dump(2) << '\n';
}

OrbitPartition load_partition_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open partition file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad partition JSON: ") + e.what(), 0);
    }
    OrbitPartition p;
    try {
        p.assignment = j.at("assignment").get<std::vector<std::uint32_t>>();
        p.orbit_count = j.at("orbit_count").get<std::uint32_t>();
        if (j.at("edge_count").get<std::size_t>() != p.assignment.size()) {
            throw ParseError("edge_count does not match assignment length", 0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad partition JSON: ") + e.what(), 0);
    }
    p.validate();
    return p;
}

PairedGroup close_paired(const std::vector<std::pair<Perm, Perm>>& generator_pairs,
                         std::size_t n_in, std::size_t n_out, const GroupLimits& limits) {
    if (generator_pairs.empty()) {
        throw ValidationError("paired closure needs at least one generator pair");
    }
    std::vector<Perm> block_gens;
    block_gens.reserve(generator_pairs.size());
    for (const auto& [pin, pout] : generator_pairs) {
        if (pin.degree() != n_in || pout.degree() != n_out) {
            throw ValidationError("generator pair degrees do not match the layer shape");
        }
        Perm b;
        b.map.resize(n_in + n_out);
        for (std::size_t i = 0; i < n_in; ++i) b.map[i] = pin.map[i];
        for (std::size_t i = 0; i < n_out; ++i) {
            b.map[n_in + i] = static_cast<std::uint32_t>(n_in) + pout.map[i];
        }
        block_gens.push_back(std::move(b));
    }

    auto group = std::make_shared<const PermGroup>(close_generators(block_gens, limits));

    std::vector<Perm> in_perms, out_perms;
    in_perms.reserve(group->order());
    out_perms.reserve(group->order());
    for (const Perm& e : group->elements()) {
        Perm pin, pout;
        pin.map.assign(e.map.begin(), e.map.begin() + n_in);
        pout.map.resize(n_out);
        for (std::size_t i = 0; i < n_out; ++i) {
            pout.map[i] = e.map[n_in + i] - static_cast<std::uint32_t>(n_in);
        }
        in_perms.push_back(std::move(pin));
        out_perms.push_back(std::move(pout));
    }

    PairedGroup pg{group,
                   GroupAction::create(group, std::move(in_perms), limits, ActionCheck::Spot),
                   GroupAction::create(group, std::move(out_perms), limits, ActionCheck::Spot)};
    return pg;
}

}  // namespace aeq
