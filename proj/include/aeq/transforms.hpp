#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aeq/group_action.hpp"
#include "aeq/perm.hpp"

namespace aeq {

/// A square grayscale image domain; pixels are indexed row-major,
/// pixel (r, c) at r * side + c.
struct ImageGrid {
    std::size_t side = 0;
    std::size_t pixels() const { return side * side; }
    static ImageGrid of(std::size_t side);
};

/// Pixel-permutation generators for the builtin image symmetries.
Perm rot90_perm(const ImageGrid& grid);          // (r, c) -> (c, side-1-r)
Perm hflip_perm(const ImageGrid& grid);          // mirror columns
Perm vflip_perm(const ImageGrid& grid);          // mirror rows
Perm htrans_perm(const ImageGrid& grid, std::size_t stride);  // cyclic column shift
Perm vtrans_perm(const ImageGrid& grid, std::size_t stride);  // cyclic row shift

/// A group of lossless image transforms realized as pixel permutations.
struct TransformGroup {
    enum class Provenance { Builtin, File };

    std::string name;
    GroupPtr group;      // degree side^2
    GroupAction action;  // natural action on pixels
    Provenance provenance = Provenance::Builtin;

    std::size_t order() const { return group->order(); }
};

/// Builtin names: rot90 | hflip | vflip | htrans<k> | vtrans<k>.
/// Throws ConfigError for unknown names or incompatible grids.
TransformGroup builtin_transform(const std::string& name, const ImageGrid& grid,
                                 const GroupLimits& limits = {});

/// Loads generators in the permutation text format (degree must equal
/// side^2) and closes them.
TransformGroup load_transform_group(const std::filesystem::path& path, const ImageGrid& grid,
                                    const GroupLimits& limits = {});

/// out[perm(i)] = image[i]; the pixel multiset is preserved exactly.
std::vector<double> apply_transform(const Perm& p, const std::vector<double>& image);

}  // namespace aeq
