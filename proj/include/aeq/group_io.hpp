#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aeq/perm.hpp"
#include "aeq/perm_group.hpp"

namespace aeq {

/// Text format: one permutation per line as space-separated images
/// ("1 2 0"); '#' starts a comment; blank lines ignored; degree inferred
/// from the line length and required to be uniform across the file.
std::vector<Perm> parse_perm_lines(const std::string& text);

std::vector<Perm> load_perm_file(const std::filesystem::path& path);

/// Canonical serialization: one line per permutation, single spaces,
/// trailing newline, no comments.
std::string format_perm_lines(const std::vector<Perm>& perms);

void save_perm_file(const std::filesystem::path& path, const std::vector<Perm>& perms);

/// Reads generator lines and closes them into a group.
PermGroup load_group(const std::filesystem::path& path, const GroupLimits& limits = {});

}  // namespace aeq
