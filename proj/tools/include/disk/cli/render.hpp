#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "disk/cli/png.hpp"
#include "disk/kspace.hpp"
#include "disk/phantom.hpp"

namespace disk::cli {

using Rgb = std::array<std::uint8_t, 3>;

// Label colours; background keeps the grayscale image.
inline constexpr std::array<Rgb, kNumClasses> kPalette = {{
    {0, 0, 0},        // background (not drawn)
    {230, 57, 70},    // LV blood pool
    {42, 157, 143},   // myocardium
    {69, 123, 231},   // RV
}};

// Intensities clamped to [0, 1] and quantized to 8 bits.
RgbImage grayscale_frame(const ImageVolume& image, std::size_t frame);
// Labels >= 1 painted opaque in their palette colour over the grayscale frame.
RgbImage label_overlay(const ImageVolume& image, const LabelVolume& labels, std::size_t frame);
// log(1 + 1000|v|) / log(1001) at sampled (k_y, k_x) positions; black elsewhere.
RgbImage kspace_scatter(const KSpaceSampleSet& samples, std::size_t frame);
RgbImage upscale(const RgbImage& image, std::size_t factor);

// {scan}_t{frame:03}_{kind}.png
std::string render_name(const std::string& scan_id, std::size_t frame, const std::string& kind);

// Writes gt, pred, kspace and zerofill images for one frame; returns the paths.
std::vector<std::filesystem::path> render_frame(const std::filesystem::path& dir,
                                                const PhantomScan& scan,
                                                const LabelVolume& predicted,
                                                const KSpaceSampleSet& samples,
                                                std::size_t frame, std::size_t scale);

}  // namespace disk::cli
