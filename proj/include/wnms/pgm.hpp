#pragma once

#include <string>

#include "wnms/matcore.hpp"

namespace wnms {

// Binary 8-bit PGM ("P5"). Values are rescaled linearly with min -> 0 and
// max -> 255; a constant matrix maps to 128.
void emit_pgm(const Matrix& values, const std::string& path);

// Pixel values of a binary PGM as doubles in [0, 255].
Matrix load_pgm(const std::string& path);

}  // namespace wnms
