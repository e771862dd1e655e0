#pragma once

// Plain-text field files:
//
//   # ostrovsky-field A=6.283185307179586 m=8 N=32
//   # <optional comment lines, e.g. the resolved run config>
//   k,re,im
//   1,0.5,0
//   ...
//
// Numbers are written in shortest round-trip form, so write -> read is
// bit-exact.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ostrovsky/spectral.hpp"

namespace ostrovsky {

/// Shortest decimal string that parses back to exactly x ("nan"/"inf" for
/// non-finite values). Locale independent.
std::string format_number(double x);
/// Strict parse of a whole token; throws PreconditionError naming `what`.
double parse_number(std::string_view token, std::string_view what = "number");

void write_field_csv(std::ostream& os, const FourierField& f,
                     const std::vector<std::string>& comments = {});
FourierField read_field_csv(std::istream& is);

void save_field(const std::filesystem::path& path, const FourierField& f,
                const std::vector<std::string>& comments = {});
FourierField load_field(const std::filesystem::path& path);

}  // namespace ostrovsky
