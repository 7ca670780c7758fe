#pragma once

namespace conestab {

inline constexpr const char* version = "0.1.0";

}
