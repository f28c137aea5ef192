#include "pcqa/ply_io.hpp"

#include "pcqa/errors.hpp"
#include "pcqa/format.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace pcqa {

namespace {

enum class Scalar { I8, U8, I16, U16, I32, U32, F32, F64 };

std::optional<Scalar> scalar_from(const std::string& t) {
  if (t == "char" || t == "int8") return Scalar::I8;
  if (t == "uchar" || t == "uint8") return Scalar::U8;
  if (t == "short" || t == "int16") return Scalar::I16;
  if (t == "ushort" || t == "uint16") return Scalar::U16;
  if (t == "int" || t == "int32") return Scalar::I32;
  if (t == "uint" || t == "uint32") return Scalar::U32;
  if (t == "float" || t == "float32") return Scalar::F32;
  if (t == "double" || t == "float64") return Scalar::F64;
  return std::nullopt;
}

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::I8:
    case Scalar::U8: return 1;
    case Scalar::I16:
    case Scalar::U16: return 2;
    case Scalar::I32:
    case Scalar::U32:
    case Scalar::F32: return 4;
    case Scalar::F64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  Scalar type = Scalar::F32;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> props;
  bool has_list = false;
};

struct Header {
  bool binary = false;
  std::vector<Element> elements;
  std::size_t lines = 0;  // consumed, including end_header
};

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool get_header_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

Header parse_header(std::istream& in, const std::string& path) {
  Header h;
  std::string line;
  if (!get_header_line(in, line) || line != "ply")
    throw ParseError::at_line(path, 1, "not a PLY file (missing 'ply' magic)");
  h.lines = 1;
  bool format_seen = false;
  while (true) {
    if (!get_header_line(in, line))
      throw ParseError::at_line(path, h.lines, "header ends before end_header");
    ++h.lines;
    const auto tok = tokenize(line);
    if (tok.empty()) continue;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "format") {
      if (tok.size() != 3 || tok[2] != "1.0")
        throw ParseError::at_line(path, h.lines, "unsupported format line '" + line + "'");
      if (tok[1] == "ascii")
        h.binary = false;
      else if (tok[1] == "binary_little_endian")
        h.binary = true;
      else
        throw ParseError::at_line(path, h.lines, "unsupported format '" + tok[1] + "'");
      format_seen = true;
      continue;
    }
    if (tok[0] == "element") {
      if (tok.size() != 3)
        throw ParseError::at_line(path, h.lines, "malformed element line '" + line + "'");
      Element e;
      e.name = tok[1];
      std::size_t count = 0;
      const auto res = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), count);
      if (res.ec != std::errc() || res.ptr != tok[2].data() + tok[2].size())
        throw ParseError::at_line(path, h.lines, "invalid element count '" + tok[2] + "'");
      e.count = count;
      h.elements.push_back(std::move(e));
      continue;
    }
    if (tok[0] == "property") {
      if (h.elements.empty())
        throw ParseError::at_line(path, h.lines, "property before any element");
      if (tok.size() >= 2 && tok[1] == "list") {
        h.elements.back().has_list = true;
        continue;
      }
      if (tok.size() != 3)
        throw ParseError::at_line(path, h.lines, "malformed property line '" + line + "'");
      const auto type = scalar_from(tok[1]);
      if (!type)
        throw ParseError::at_line(path, h.lines, "unknown property type '" + tok[1] + "'");
      h.elements.back().props.push_back({tok[2], *type});
      continue;
    }
    throw ParseError::at_line(path, h.lines, "unrecognized header line '" + line + "'");
  }
  if (!format_seen)
    throw ParseError::at_line(path, h.lines, "header has no format line");
  return h;
}

int find_prop(const Element& e, const std::string& name) {
  for (std::size_t i = 0; i < e.props.size(); ++i)
    if (e.props[i].name == name) return static_cast<int>(i);
  return -1;
}

inline std::uint64_t load_le(const unsigned char* p, std::size_t n) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) v |= std::uint64_t(p[i]) << (8 * i);
  return v;
}

double read_scalar(const unsigned char* p, Scalar s) {
  switch (s) {
    case Scalar::I8: return static_cast<double>(static_cast<std::int8_t>(p[0]));
    case Scalar::U8: return static_cast<double>(p[0]);
    case Scalar::I16: return static_cast<double>(static_cast<std::int16_t>(load_le(p, 2)));
    case Scalar::U16: return static_cast<double>(static_cast<std::uint16_t>(load_le(p, 2)));
    case Scalar::I32: return static_cast<double>(static_cast<std::int32_t>(load_le(p, 4)));
    case Scalar::U32: return static_cast<double>(static_cast<std::uint32_t>(load_le(p, 4)));
    case Scalar::F32: return std::bit_cast<float>(static_cast<std::uint32_t>(load_le(p, 4)));
    case Scalar::F64: return std::bit_cast<double>(load_le(p, 8));
  }
  return 0.0;
}

double parse_double_token(const std::string& tok, const std::string& path, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError::at_line(path, line, "invalid number '" + tok + "'");
  return v;
}

std::uint8_t parse_color_token(const std::string& tok, const std::string& path, std::size_t line) {
  int v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v < 0 || v > 255)
    throw ParseError::at_line(path, line, "invalid color value '" + tok + "'");
  return static_cast<std::uint8_t>(v);
}

struct VertexLayout {
  int x = -1, y = -1, z = -1;          // property indices
  int r = -1, g = -1, b = -1;
  bool with_colors = false;
};

VertexLayout vertex_layout(const Element& e, const std::string& path, std::size_t hdr_lines) {
  VertexLayout l;
  l.x = find_prop(e, "x");
  l.y = find_prop(e, "y");
  l.z = find_prop(e, "z");
  if (l.x < 0 || l.y < 0 || l.z < 0)
    throw ParseError::at_line(path, hdr_lines, "element vertex lacks x/y/z properties");
  for (int idx : {l.x, l.y, l.z}) {
    const Scalar t = e.props[idx].type;
    if (t != Scalar::F32 && t != Scalar::F64)
      throw ParseError::at_line(path, hdr_lines,
                                "coordinate property '" + e.props[idx].name +
                                    "' must be float or double");
  }
  l.r = find_prop(e, "red");
  l.g = find_prop(e, "green");
  l.b = find_prop(e, "blue");
  l.with_colors = l.r >= 0 && l.g >= 0 && l.b >= 0;
  if (l.with_colors) {
    for (int idx : {l.r, l.g, l.b})
      if (e.props[idx].type != Scalar::U8)
        throw ParseError::at_line(path, hdr_lines,
                                  "color property '" + e.props[idx].name + "' must be uchar");
  } else {
    // a partial red/green/blue set is treated as unknown properties
    l.r = l.g = l.b = -1;
  }
  return l;
}

inline void store_le(std::string& out, std::uint64_t v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

PointCloud load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  Header h = parse_header(in, path);

  std::size_t vertex_at = h.elements.size();
  for (std::size_t i = 0; i < h.elements.size(); ++i)
    if (h.elements[i].name == "vertex") {
      vertex_at = i;
      break;
    }
  if (vertex_at == h.elements.size())
    throw ParseError::at_line(path, h.lines, "no vertex element");
  const Element& ve = h.elements[vertex_at];
  if (ve.has_list)
    throw ParseError::at_line(path, h.lines, "list properties are not supported");
  if (ve.count == 0)
    throw ParseError::at_line(path, h.lines, "vertex count is zero");
  // elements stored ahead of the vertices must be skipped, which needs a
  // computable record size
  for (std::size_t i = 0; i < vertex_at; ++i)
    if (h.elements[i].has_list)
      throw ParseError::at_line(path, h.lines, "list properties are not supported");

  const VertexLayout lay = vertex_layout(ve, path, h.lines);

  PointCloud cloud;
  cloud.id = path;
  cloud.points.resize(static_cast<Eigen::Index>(ve.count), 3);
  if (lay.with_colors) cloud.colors.emplace(static_cast<Eigen::Index>(ve.count), 3);

  if (!h.binary) {
    std::size_t line_no = h.lines;
    std::string line;
    auto next_data_line = [&]() -> std::string {
      while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") != std::string::npos) return line;
      }
      throw ParseError::at_line(path, line_no,
                                "vertex count mismatch: file ends before " +
                                    std::to_string(ve.count) + " vertices are read");
    };
    for (std::size_t i = 0; i < vertex_at; ++i)
      for (std::size_t r = 0; r < h.elements[i].count; ++r) next_data_line();
    for (std::size_t v = 0; v < ve.count; ++v) {
      const auto tok = tokenize(next_data_line());
      if (tok.size() != ve.props.size())
        throw ParseError::at_line(path, line_no,
                                  "expected " + std::to_string(ve.props.size()) +
                                      " values, got " + std::to_string(tok.size()));
      const double x = parse_double_token(tok[lay.x], path, line_no);
      const double y = parse_double_token(tok[lay.y], path, line_no);
      const double z = parse_double_token(tok[lay.z], path, line_no);
      if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
        throw ParseError::at_line(path, line_no, "non-finite coordinate");
      cloud.points(static_cast<Eigen::Index>(v), 0) = x;
      cloud.points(static_cast<Eigen::Index>(v), 1) = y;
      cloud.points(static_cast<Eigen::Index>(v), 2) = z;
      if (lay.with_colors) {
        (*cloud.colors)(static_cast<Eigen::Index>(v), 0) = parse_color_token(tok[lay.r], path, line_no);
        (*cloud.colors)(static_cast<Eigen::Index>(v), 1) = parse_color_token(tok[lay.g], path, line_no);
        (*cloud.colors)(static_cast<Eigen::Index>(v), 2) = parse_color_token(tok[lay.b], path, line_no);
      }
    }
    return cloud;
  }

  // binary little-endian payload
  const std::size_t payload_start = static_cast<std::size_t>(in.tellg());
  std::size_t skip = 0;
  for (std::size_t i = 0; i < vertex_at; ++i) {
    std::size_t rec = 0;
    for (const auto& p : h.elements[i].props) rec += scalar_size(p.type);
    skip += rec * h.elements[i].count;
  }
  std::size_t rec_size = 0;
  std::vector<std::size_t> offsets(ve.props.size());
  for (std::size_t i = 0; i < ve.props.size(); ++i) {
    offsets[i] = rec_size;
    rec_size += scalar_size(ve.props[i].type);
  }
  in.seekg(static_cast<std::streamoff>(skip), std::ios::cur);
  std::vector<unsigned char> data(ve.count * rec_size);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  const std::size_t got = static_cast<std::size_t>(in.gcount());
  if (got != data.size())
    throw ParseError::at_offset(path, payload_start + skip + got,
                                "vertex count mismatch: expected " +
                                    std::to_string(data.size()) + " payload bytes, got " +
                                    std::to_string(got));
  for (std::size_t v = 0; v < ve.count; ++v) {
    const unsigned char* rec = data.data() + v * rec_size;
    const double x = read_scalar(rec + offsets[lay.x], ve.props[lay.x].type);
    const double y = read_scalar(rec + offsets[lay.y], ve.props[lay.y].type);
    const double z = read_scalar(rec + offsets[lay.z], ve.props[lay.z].type);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      throw ParseError::at_offset(path, payload_start + skip + v * rec_size,
                                  "non-finite coordinate in vertex " + std::to_string(v));
    cloud.points(static_cast<Eigen::Index>(v), 0) = x;
    cloud.points(static_cast<Eigen::Index>(v), 1) = y;
    cloud.points(static_cast<Eigen::Index>(v), 2) = z;
    if (lay.with_colors) {
      (*cloud.colors)(static_cast<Eigen::Index>(v), 0) = rec[offsets[lay.r]];
      (*cloud.colors)(static_cast<Eigen::Index>(v), 1) = rec[offsets[lay.g]];
      (*cloud.colors)(static_cast<Eigen::Index>(v), 2) = rec[offsets[lay.b]];
    }
  }
  return cloud;
}

void save_ply(const PointCloud& cloud, const std::string& path, PlyFormat format) {
  validate(cloud);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");

  const Eigen::Index n = cloud.size();
  std::string s;
  s += "ply\n";
  s += format == PlyFormat::Ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
  s += "element vertex " + std::to_string(n) + "\n";
  s += "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_colors())
    s += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  s += "end_header\n";

  if (format == PlyFormat::Ascii) {
    for (Eigen::Index i = 0; i < n; ++i) {
      s += format_double(cloud.points(i, 0));
      s += ' ';
      s += format_double(cloud.points(i, 1));
      s += ' ';
      s += format_double(cloud.points(i, 2));
      if (cloud.has_colors()) {
        for (int c = 0; c < 3; ++c) {
          s += ' ';
          s += std::to_string(static_cast<int>((*cloud.colors)(i, c)));
        }
      }
      s += '\n';
    }
  } else {
    s.reserve(s.size() + static_cast<std::size_t>(n) * (24 + (cloud.has_colors() ? 3 : 0)));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c)
        store_le(s, std::bit_cast<std::uint64_t>(cloud.points(i, c)), 8);
      if (cloud.has_colors())
        for (int c = 0; c < 3; ++c) s.push_back(static_cast<char>((*cloud.colors)(i, c)));
    }
  }
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace pcqa
