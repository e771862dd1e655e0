#include "ostrovsky/version.hpp"

#ifndef OSTROVSKY_VERSION
#define OSTROVSKY_VERSION "0.0.0"
#endif

namespace ostrovsky {

std::string_view version() { return "ostrovsky-lab " OSTROVSKY_VERSION; }

}  // namespace ostrovsky
