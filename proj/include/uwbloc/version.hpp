#ifndef UWBLOC_VERSION_HPP_
#define UWBLOC_VERSION_HPP_

namespace uwbloc {

inline constexpr const char* kToolName = "uwbloc";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace uwbloc

#endif  // UWBLOC_VERSION_HPP_
