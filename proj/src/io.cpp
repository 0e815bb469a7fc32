#include "eq2pc/io.hpp"

#include <fstream>
#include <sstream>

namespace eq2pc {

namespace {

Shape parse_dims(const Json& j) {
  if (!j.is_array() || j.empty()) throw FormatError("\"dims\" must be a non-empty array");
  Shape dims;
  for (const auto& d : j) {
    if (!d.is_number_integer() || d.get<std::int64_t>() < 1) throw FormatError("\"dims\" entries must be positive integers");
    dims.push_back(d.get<std::size_t>());
  }
  return dims;
}

std::vector<std::int64_t> parse_cells(const Json& j, std::size_t expected) {
  if (!j.is_array()) throw FormatError("\"cells\" must be an array");
  if (j.size() != expected)
    throw FormatError("\"cells\" holds " + std::to_string(j.size()) + " values, dims need " + std::to_string(expected));
  std::vector<std::int64_t> cells;
  cells.reserve(expected);
  for (const auto& c : j) {
    if (!c.is_number_integer()) throw FormatError("\"cells\" entries must be integers");
    cells.push_back(c.get<std::int64_t>());
  }
  return cells;
}

int parse_phases(const Json& j) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 1) throw FormatError("\"phases\" must be a positive integer");
  return j.get<int>();
}

Json parse_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw FormatError("expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw FormatError("unexpected field \"" + key + "\"");
  }
}

StructureDocument build(const Json& j, std::vector<std::int64_t> cells, Shape dims) {
  const int phases = parse_phases(j.at("phases"));
  try {
    return {Structure(std::move(dims), phases, std::move(cells)), j.contains("meta") ? j.at("meta") : Json()};
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

}  // namespace

std::string serialize_structure(const Structure& s, const Json& meta) {
  Json j;
  j["dims"] = s.dims();
  j["phases"] = s.phases();
  j["cells"] = s.cells().values();
  if (!meta.is_null()) j["meta"] = meta;
  return j.dump();
}

StructureDocument parse_structure(const std::string& text) {
  const Json j = parse_text(text);
  check_keys(j, {"dims", "phases", "cells", "meta"});
  for (const char* key : {"dims", "phases", "cells"})
    if (!j.contains(key)) throw FormatError(std::string("missing field \"") + key + "\"");
  Shape dims = parse_dims(j.at("dims"));
  auto cells = parse_cells(j.at("cells"), element_count(dims));
  return build(j, std::move(cells), std::move(dims));
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void save_structure(const std::filesystem::path& path, const Structure& s, const Json& meta) {
  if (s.size() <= kRawCellThreshold) {
    write_text_file(path, serialize_structure(s, meta));
    return;
  }
  if (s.phases() > 255) throw FormatError("raw cell dumps hold at most 255 phases");
  auto raw = path;
  raw.replace_extension(".u8");
  std::string bytes(s.size(), '\0');
  for (std::size_t i = 0; i < s.size(); ++i) bytes[i] = static_cast<char>(s[i]);
  write_text_file(raw, bytes);
  Json j;
  j["dims"] = s.dims();
  j["phases"] = s.phases();
  j["cells_file"] = raw.filename().string();
  if (!meta.is_null()) j["meta"] = meta;
  write_text_file(path, j.dump());
}

StructureDocument load_structure(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const Json j = parse_text(ss.str());
  if (!j.is_object() || !j.contains("cells_file")) return parse_structure(ss.str());

  check_keys(j, {"dims", "phases", "cells_file", "meta"});
  if (!j.contains("dims") || !j.contains("phases")) throw FormatError("raw header needs \"dims\" and \"phases\"");
  Shape dims = parse_dims(j.at("dims"));
  const auto raw = path.parent_path() / j.at("cells_file").get<std::string>();
  std::ifstream rin(raw, std::ios::binary);
  if (!rin) throw std::runtime_error("cannot read " + raw.string());
  std::string bytes((std::istreambuf_iterator<char>(rin)), std::istreambuf_iterator<char>());
  if (bytes.size() != element_count(dims)) throw FormatError("raw cell dump size does not match dims");
  std::vector<std::int64_t> cells(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) cells[i] = static_cast<unsigned char>(bytes[i]);
  return build(j, std::move(cells), std::move(dims));
}

Json kernels_to_json(const KernelList& kernels) {
  Json j;
  j["dims"] = kernels.shape();
  Json list = Json::array();
  for (const auto& k : kernels.kernels()) list.push_back(k.values());
  j["kernels"] = list;
  return j;
}

KernelList kernels_from_json(const Json& j) {
  check_keys(j, {"dims", "kernels"});
  if (!j.contains("dims") || !j.contains("kernels")) throw FormatError("kernel list needs \"dims\" and \"kernels\"");
  const Shape dims = parse_dims(j.at("dims"));
  if (!j.at("kernels").is_array() || j.at("kernels").empty()) throw FormatError("\"kernels\" must be a non-empty array");
  std::vector<IntArray> kernels;
  for (const auto& k : j.at("kernels")) kernels.emplace_back(dims, parse_cells(k, element_count(dims)));
  try {
    return KernelList(std::move(kernels));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

Json plan_to_json(const CoalescencePlan& plan) {
  Json j;
  j["mapping"] = plan.mapping();
  return j;
}

CoalescencePlan plan_from_json(const Json& j) {
  check_keys(j, {"mapping"});
  if (!j.contains("mapping") || !j.at("mapping").is_array()) throw FormatError("plan needs a \"mapping\" array");
  std::vector<int> mapping;
  for (const auto& v : j.at("mapping")) {
    if (!v.is_number_integer()) throw FormatError("\"mapping\" entries must be integers");
    mapping.push_back(v.get<int>());
  }
  try {
    return CoalescencePlan(std::move(mapping));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

std::array<unsigned char, 3> palette_color(int phase, int phases) {
  static constexpr std::array<std::array<unsigned char, 3>, 8> kPalette{{
      {31, 119, 180},   // blue
      {214, 39, 40},    // red
      {44, 160, 44},    // green
      {255, 127, 14},   // orange
      {148, 103, 189},  // purple
      {140, 86, 75},    // brown
      {227, 119, 194},  // pink
      {127, 127, 127},  // gray
  }};
  if (phase == phases) return {255, 255, 255};
  return kPalette[static_cast<std::size_t>(phase - 1) % kPalette.size()];
}

void render_ppm(const std::filesystem::path& path, const Structure& s, std::size_t block) {
  if (block < 1) throw std::invalid_argument("block size must be positive");
  const Shape& dims = s.dims();
  const std::size_t rank = dims.size();
  const std::size_t rows = rank == 1 ? 1 : dims[rank - 2];
  const std::size_t cols = dims[rank - 1];
  const std::size_t slices = s.size() / (rows * cols);
  const std::size_t gap = slices > 1 ? 1 : 0;  // one block of gray between slices
  const std::size_t width_cells = slices * cols + (slices - 1) * gap;
  const std::size_t width = width_cells * block, height = rows * block;

  std::string pixels(width * height * 3, static_cast<char>(160));
  for (std::size_t k = 0; k < slices; ++k)
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const auto rgb = palette_color(s[(k * rows + r) * cols + c], s.phases());
        const std::size_t x0 = (k * (cols + gap) + c) * block, y0 = r * block;
        for (std::size_t y = y0; y < y0 + block; ++y)
          for (std::size_t x = x0; x < x0 + block; ++x)
            for (std::size_t ch = 0; ch < 3; ++ch) pixels[(y * width + x) * 3 + ch] = static_cast<char>(rgb[ch]);
      }
  write_text_file(path, "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n" + pixels);
}

}  // namespace eq2pc
