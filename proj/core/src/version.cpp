#include "sfec/version.hpp"

namespace sfec {

const char* version() { return "0.1.0"; }

}  // namespace sfec
