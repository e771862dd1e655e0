#pragma once

#include <string_view>

namespace ostrovsky {

/// "ostrovsky-lab <major.minor.patch>", embedded in every output artifact.
std::string_view version();

}  // namespace ostrovsky
