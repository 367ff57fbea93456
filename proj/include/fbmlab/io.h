#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace fbmlab::io {

/// %.17g: round-trips every double.
std::string g17(double x);

/// Shortest round-trip decimal; integral values keep a trailing ".0".
std::string shortest(double x);

/// Writes `contents` to a temporary sibling and renames it over `target`.
void write_atomically(const std::filesystem::path& target, std::string_view contents);

}  // namespace fbmlab::io
