#ifndef RADI_VERSION_HPP_
#define RADI_VERSION_HPP_

namespace radi {
inline constexpr const char* kVersion = "0.1.0";
}

#endif  // RADI_VERSION_HPP_
