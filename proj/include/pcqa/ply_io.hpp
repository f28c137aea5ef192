#pragma once

#include "pcqa/point_cloud.hpp"

#include <string>

namespace pcqa {

enum class PlyFormat { Ascii, BinaryLittleEndian };

/// Reads a PLY file. Supported: "format ascii 1.0" and
/// "format binary_little_endian 1.0", an "element vertex" with properties
/// x/y/z (float or double, widened to double) and optional red/green/blue
/// (uchar). Unknown fixed-width vertex properties are skipped; list
/// properties and big-endian files are rejected. Throws ParseError naming
/// the offending line or byte offset.
PointCloud load_ply(const std::string& path);

/// Writes positions as double properties and colors (when present) as
/// uchar, so a binary round trip reproduces the cloud bit-exactly. ASCII
/// output uses shortest round-trip number formatting.
void save_ply(const PointCloud& cloud, const std::string& path,
              PlyFormat format = PlyFormat::BinaryLittleEndian);

}  // namespace pcqa
