#pragma once

namespace sfec {

const char* version();

}  // namespace sfec
