#include "fbmlab/io.h"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "fbmlab/errors.h"

namespace fbmlab::io {

std::string g17(double x) {
  std::array<char, 40> buf{};
  const int len = std::snprintf(buf.data(), buf.size(), "%.17g", x);
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

std::string shortest(double x) {
  std::array<char, 40> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  std::string s(buf.data(), end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void write_atomically(const std::filesystem::path& target, std::string_view contents) {
  auto tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw Error("rename " + tmp.string() + " -> " + target.string() + ": " + ec.message());
}

}  // namespace fbmlab::io
