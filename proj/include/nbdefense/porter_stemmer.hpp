#pragma once

#include <string>
#include <string_view>

namespace nbdefense {

// Porter (1980) suffix-stripping stemmer for lowercase ASCII words.
// Words containing other characters, and words of length <= 2, are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace nbdefense
