#pragma once

#include "regor/regeneration.hpp"
#include "regor/types.hpp"

#include <filesystem>

namespace regor {

/// ASCII PLY (.ply) or whitespace-separated XYZ (.xyz, .txt), chosen by
/// extension. Throws IoError, ParseError (with line number), UnsupportedFormat.
PointCloud load_point_cloud(const std::filesystem::path& path);
void save_point_cloud(const std::filesystem::path& path, const PointCloud& cloud);

/// `src_index,dst_index` rows with an optional header; duplicate rows collapse.
CorrespondenceSet load_correspondences(const std::filesystem::path& path);
void save_correspondences(const std::filesystem::path& path, const CorrespondenceSet& set);

/// {"matrix": [[...],[...],[...],[...]]}, 4x4 homogeneous, row-major.
void save_transform(const std::filesystem::path& path, const RigidTransform& transform);
RigidTransform load_transform(const std::filesystem::path& path);

void save_trace(const std::filesystem::path& path, const RegenerationTrace& trace);

/// Whole-file helpers shared by the loaders and the CLI.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace regor
