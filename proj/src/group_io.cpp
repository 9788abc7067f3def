#include "aeq/group_io.hpp"

#include <fstream>
#include <sstream>

#include "aeq/errors.hpp"

namespace aeq {

std::vector<Perm> parse_perm_lines(const std::string& text) {
    std::vector<Perm> perms;
    std::size_t line_start = 0;
    std::size_t degree = 0;

    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string::npos) line_end = text.size();
        std::string line = text.substr(line_start, line_end - line_start);
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }

        std::istringstream in(line);
        std::vector<std::uint32_t> images;
        std::string tok;
        while (in >> tok) {
            std::size_t pos = 0;
            unsigned long v = 0;
            try {
                v = std::stoul(tok, &pos);
            } catch (const std::exception&) {
                throw ParseError("expected a non-negative index, got '" + tok + "'", line_start);
            }
            if (pos != tok.size()) {
                throw ParseError("expected a non-negative index, got '" + tok + "'", line_start);
            }
            images.push_back(static_cast<std::uint32_t>(v));
        }

        if (!images.empty()) {
            if (degree == 0) {
                degree = images.size();
            } else if (images.size() != degree) {
                throw ParseError("permutation has " + std::to_string(images.size()) +
                                     " images, expected " + std::to_string(degree),
                                 line_start);
            }
            Perm p(std::move(images));
            if (!is_bijection(p)) {
                throw ParseError("line is not a bijection", line_start);
            }
            perms.push_back(std::move(p));
        }

        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    return perms;
}

std::vector<Perm> load_perm_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open permutation file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_perm_lines(buf.str());
}

std::string format_perm_lines(const std::vector<Perm>& perms) {
    std::string out;
    for (const Perm& p : perms) {
        out += to_string(p);
        out += '\n';
    }
    return out;
}

void save_perm_file(const std::filesystem::path& path, const std::vector<Perm>& perms) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write permutation file: " + path.string());
    out << format_perm_lines(perms);
}

PermGroup load_group(const std::filesystem::path& path, const GroupLimits& limits) {
    std::vector<Perm> gens = load_perm_file(path);
    if (gens.empty()) {
        throw ParseError("group file contains no permutations", 0);
    }
    return close_generators(gens, limits);
}

}  // namespace aeq
