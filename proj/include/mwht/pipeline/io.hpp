#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mwht/grid.hpp"

namespace mwht::pipeline {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Binary PPM (P6) preview, row j = 0 at the bottom so +y points up.
/// Colormap: black -> blue -> magenta -> orange -> yellow -> white, linear in the normalized
/// value; `db_range` > 0 maps [max - db_range dB, max] instead (power maps).
void save_ppm(const std::filesystem::path& path, const ScalarGrid& map, double db_range = 0.0);
void save_mask_ppm(const std::filesystem::path& path, const MaskGrid& mask);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace mwht::pipeline
