#include "regor/io.hpp"

#include "regor/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace regor {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<double> numbers_on_line(const std::string& line, const std::filesystem::path& path, std::size_t lineno) {
  std::istringstream in(line);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) parse_fail(path, lineno, "not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

PointCloud build_cloud(std::vector<Vec3> pts, const std::filesystem::path& path) {
  try {
    return PointCloud(std::move(pts));
  } catch (const InvalidArgument& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

PointCloud load_xyz(const std::filesystem::path& path, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<Vec3> pts;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto v = numbers_on_line(t, path, lineno);
    if (v.size() < 3) parse_fail(path, lineno, "expected at least 3 coordinates");
    pts.emplace_back(v[0], v[1], v[2]);
  }
  return build_cloud(std::move(pts), path);
}

PointCloud load_ply(const std::filesystem::path& path, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line) || trim(line) != "ply") parse_fail(path, 1, "missing 'ply' magic");
  ++lineno;

  std::size_t vertex_count = 0;
  bool in_vertex = false, seen_vertex = false;
  std::vector<std::string> props;
  std::vector<std::size_t> elements_before;  // rows of elements that precede the vertices
  std::size_t pending_rows = 0;
  for (;;) {
    if (!std::getline(in, line)) parse_fail(path, lineno, "header not terminated by end_header");
    ++lineno;
    std::istringstream words(trim(line));
    std::string kw;
    words >> kw;
    if (kw.empty() || kw == "comment" || kw == "obj_info") continue;
    if (kw == "end_header") break;
    if (kw == "format") {
      std::string fmt;
      words >> fmt;
      if (fmt != "ascii") throw UnsupportedFormat(path.string() + ": PLY format '" + fmt + "' is not supported");
    } else if (kw == "element") {
      std::string name;
      long long count = -1;
      words >> name >> count;
      if (count < 0) parse_fail(path, lineno, "bad element count");
      in_vertex = name == "vertex";
      if (in_vertex) {
        seen_vertex = true;
        vertex_count = static_cast<std::size_t>(count);
      } else if (!seen_vertex) {
        pending_rows += static_cast<std::size_t>(count);
      }
    } else if (kw == "property") {
      if (in_vertex) {
        std::string type, name;
        words >> type;
        if (type == "list") parse_fail(path, lineno, "list properties on vertices are not supported");
        words >> name;
        props.push_back(name);
      }
    } else {
      parse_fail(path, lineno, "unknown header keyword '" + kw + "'");
    }
  }
  if (!seen_vertex) parse_fail(path, lineno, "no vertex element");
  const auto at = [&](const char* n) -> std::size_t {
    const auto it = std::find(props.begin(), props.end(), n);
    if (it == props.end()) parse_fail(path, lineno, std::string("vertex property '") + n + "' missing");
    return static_cast<std::size_t>(it - props.begin());
  };
  const std::size_t ix = at("x"), iy = at("y"), iz = at("z");

  std::vector<Vec3> pts;
  pts.reserve(vertex_count);
  while (pts.size() < vertex_count) {
    if (!std::getline(in, line)) parse_fail(path, lineno, "file ended after " + std::to_string(pts.size()) + " vertices");
    ++lineno;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (pending_rows > 0) {
      --pending_rows;
      continue;
    }
    const auto v = numbers_on_line(t, path, lineno);
    if (v.size() != props.size()) {
      parse_fail(path, lineno, "expected " + std::to_string(props.size()) + " values, got " + std::to_string(v.size()));
    }
    pts.emplace_back(v[ix], v[iy], v[iz]);
  }
  return build_cloud(std::move(pts), path);
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

PointCloud load_point_cloud(const std::filesystem::path& path) {
  const auto ext = lower(path.extension().string());
  if (ext != ".ply" && ext != ".xyz" && ext != ".txt") {
    throw UnsupportedFormat(path.string() + ": unknown point cloud extension '" + ext + "'");
  }
  const auto text = read_text_file(path);
  return ext == ".ply" ? load_ply(path, text) : load_xyz(path, text);
}

void save_point_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  const auto ext = lower(path.extension().string());
  std::ostringstream out;
  out.precision(17);
  if (ext == ".ply") {
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
        << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  } else if (ext != ".xyz" && ext != ".txt") {
    throw UnsupportedFormat(path.string() + ": unknown point cloud extension '" + ext + "'");
  }
  for (const auto& p : cloud.points()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  write_text_file(path, out.str());
}

CorrespondenceSet load_correspondences(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::size_t lineno = 0;
  std::vector<Correspondence> pairs;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (lineno == 1 && lower(t) == "src_index,dst_index") continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos) parse_fail(path, lineno, "expected 'src_index,dst_index'");
    const auto a = trim(t.substr(0, comma)), b = trim(t.substr(comma + 1));
    std::uint32_t s = 0, d = 0;
    const auto ra = std::from_chars(a.data(), a.data() + a.size(), s);
    const auto rb = std::from_chars(b.data(), b.data() + b.size(), d);
    if (ra.ec != std::errc() || ra.ptr != a.data() + a.size() || rb.ec != std::errc() ||
        rb.ptr != b.data() + b.size()) {
      parse_fail(path, lineno, "indices must be non-negative integers");
    }
    pairs.push_back({s, d});
  }
  return CorrespondenceSet(std::move(pairs));
}

void save_correspondences(const std::filesystem::path& path, const CorrespondenceSet& set) {
  std::ostringstream out;
  out << "src_index,dst_index\n";
  for (const auto& c : set) out << c.source << ',' << c.target << '\n';
  write_text_file(path, out.str());
}

void save_transform(const std::filesystem::path& path, const RigidTransform& transform) {
  const Eigen::Matrix4d m = transform.matrix();
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 4; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
  write_text_file(path, nlohmann::json{{"matrix", rows}}.dump(2) + "\n");
}

RigidTransform load_transform(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!j.contains("matrix") || !j["matrix"].is_array() || j["matrix"].size() != 4) {
    throw ParseError(path.string() + ": expected a 4x4 'matrix'");
  }
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    const auto& row = j["matrix"][r];
    if (!row.is_array() || row.size() != 4) throw ParseError(path.string() + ": matrix row " + std::to_string(r) + " must have 4 numbers");
    for (int c = 0; c < 4; ++c) {
      if (!row[c].is_number()) throw ParseError(path.string() + ": non-numeric matrix entry");
      m(r, c) = row[c].get<double>();
    }
  }
  try {
    return RigidTransform::from_matrix(m);
  } catch (const InvalidArgument& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_trace(const std::filesystem::path& path, const RegenerationTrace& trace) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : trace.stages) {
    stages.push_back({{"stage", s.stage},
                      {"seed_count", s.seed_count},
                      {"region_count", s.region_count},
                      {"accepted_regions", s.accepted_regions},
                      {"merged_count", s.merged_count},
                      {"corrected_count", s.corrected_count},
                      {"mean_local_score", s.mean_local_score},
                      {"global_fallback", s.global_fallback},
                      {"seconds", s.seconds}});
  }
  const auto& o = trace.options;
  nlohmann::json j{{"options",
                    {{"matching", std::string(to_string(o.matching))},
                     {"consistency", std::string(to_string(o.consistency))},
                     {"local_correction", o.local_correction},
                     {"global_correction", o.global_correction},
                     {"progressive", o.progressive}}},
                   {"stages", stages},
                   {"collapsed", trace.collapsed},
                   {"collapse_stage", trace.collapse_stage}};
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace regor
