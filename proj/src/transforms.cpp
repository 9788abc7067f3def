#include "aeq/transforms.hpp"

#include "aeq/errors.hpp"
#include "aeq/group_io.hpp"

namespace aeq {

ImageGrid ImageGrid::of(std::size_t side) {
    if (side == 0) throw ValidationError("image grid side must be positive");
    return ImageGrid{side};
}

Perm rot90_perm(const ImageGrid& grid) {
    const std::size_t s = grid.side;
    Perm p;
    p.map.resize(grid.pixels());
    for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) {
            p.map[r * s + c] = static_cast<std::uint32_t>(c * s + (s - 1 - r));
        }
    }
    return p;
}

Perm hflip_perm(const ImageGrid& grid) {
    const std::size_t s = grid.side;
    Perm p;
    p.map.resize(grid.pixels());
    for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) {
            p.map[r * s + c] = static_cast<std::uint32_t>(r * s + (s - 1 - c));
        }
    }
    return p;
}

Perm vflip_perm(const ImageGrid& grid) {
    const std::size_t s = grid.side;
    Perm p;
    p.map.resize(grid.pixels());
    for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) {
            p.map[r * s + c] = static_cast<std::uint32_t>((s - 1 - r) * s + c);
        }
    }
    return p;
}

Perm htrans_perm(const ImageGrid& grid, std::size_t stride) {
    const std::size_t s = grid.side;
    Perm p;
    p.map.resize(grid.pixels());
    for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) {
            p.map[r * s + c] = static_cast<std::uint32_t>(r * s + (c + stride) % s);
        }
    }
    return p;
}

Perm vtrans_perm(const ImageGrid& grid, std::size_t stride) {
    const std::size_t s = grid.side;
    Perm p;
    p.map.resize(grid.pixels());
    for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) {
            p.map[r * s + c] = static_cast<std::uint32_t>(((r + stride) % s) * s + c);
        }
    }
    return p;
}

namespace {

TransformGroup make_group(std::string name, Perm generator, const GroupLimits& limits,
                          TransformGroup::Provenance provenance) {
    auto group = std::make_shared<const PermGroup>(close_generators({std::move(generator)}, limits));
    GroupAction action = GroupAction::natural(group);
    return TransformGroup{std::move(name), std::move(group), std::move(action), provenance};
}

bool parse_strided(const std::string& name, const std::string& prefix, std::size_t& stride) {
    if (name.rfind(prefix, 0) != 0) return false;
    const std::string tail = name.substr(prefix.size());
    if (tail.empty()) return false;
    try {
        std::size_t pos = 0;
        stride = std::stoul(tail, &pos);
        return pos == tail.size();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

TransformGroup builtin_transform(const std::string& name, const ImageGrid& grid,
                                 const GroupLimits& limits) {
    std::size_t stride = 0;
    if (name == "rot90") {
        return make_group(name, rot90_perm(grid), limits, TransformGroup::Provenance::Builtin);
    }
    if (name == "hflip") {
        return make_group(name, hflip_perm(grid), limits, TransformGroup::Provenance::Builtin);
    }
    if (name == "vflip") {
        return make_group(name, vflip_perm(grid), limits, TransformGroup::Provenance::Builtin);
    }
    if (parse_strided(name, "htrans", stride)) {
        if (stride == 0 || stride >= grid.side) {
            throw ConfigError("htrans stride must be in [1, side) for side " +
                              std::to_string(grid.side));
        }
        return make_group(name, htrans_perm(grid, stride), limits,
                          TransformGroup::Provenance::Builtin);
    }
    if (parse_strided(name, "vtrans", stride)) {
        if (stride == 0 || stride >= grid.side) {
            throw ConfigError("vtrans stride must be in [1, side) for side " +
                              std::to_string(grid.side));
        }
        return make_group(name, vtrans_perm(grid, stride), limits,
                          TransformGroup::Provenance::Builtin);
    }
    throw ConfigError("unknown transform name: " + name);
}

TransformGroup load_transform_group(const std::filesystem::path& path, const ImageGrid& grid,
                                    const GroupLimits& limits) {
    std::vector<Perm> gens = load_perm_file(path);
    if (gens.empty()) {
        throw ParseError("group file contains no permutations", 0);
    }
    if (gens[0].degree() != grid.pixels()) {
        throw ConfigError("group file degree " + std::to_string(gens[0].degree()) +
                          " does not match grid with " + std::to_string(grid.pixels()) + " pixels");
    }
    auto group = std::make_shared<const PermGroup>(close_generators(gens, limits));
    GroupAction action = GroupAction::natural(group);
    return TransformGroup{path.filename().string(), std::move(group), std::move(action),
                          TransformGroup::Provenance::File};
}

std::vector<double> apply_transform(const Perm& p, const std::vector<double>& image) {
    if (p.degree() != image.size()) {
        throw ValidationError("image length does not match the transform degree");
    }
    return apply_perm(p, image);
}

}  // namespace aeq
