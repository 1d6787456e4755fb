#ifndef RVAS_VERSION_HPP
#define RVAS_VERSION_HPP

namespace rvas {
inline constexpr const char* version = "0.1.0";
}

#endif  // RVAS_VERSION_HPP
