#ifndef EQ2PC_IO_HPP
#define EQ2PC_IO_HPP

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "eq2pc/derive.hpp"
#include "eq2pc/structure.hpp"
#include "json.hpp"

namespace eq2pc {

using Json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structures above this many cells are stored as a raw u8 dump plus a JSON
/// header.
inline constexpr std::size_t kRawCellThreshold = 1'000'000;

struct StructureDocument {
  Structure structure;
  Json meta;  ///< null when absent
};

/// {"dims":[..],"phases":n,"cells":[..],"meta":{..}} with no whitespace;
/// "meta" is omitted when null.
std::string serialize_structure(const Structure& s, const Json& meta = nullptr);
StructureDocument parse_structure(const std::string& text);

/// Writes JSON, or for large structures the header at `path` with
/// "cells_file" naming a sibling `<stem>.u8` dump.
void save_structure(const std::filesystem::path& path, const Structure& s, const Json& meta = nullptr);
StructureDocument load_structure(const std::filesystem::path& path);

/// {"dims":[..],"kernels":[[..],[..]]}, one row-major binary list per phase.
Json kernels_to_json(const KernelList& kernels);
KernelList kernels_from_json(const Json& j);

/// {"mapping":[..]}
Json plan_to_json(const CoalescencePlan& plan);
CoalescencePlan plan_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Binary P6 image, one block x block square per cell. Rank 1 renders as a
/// single row, rank >= 3 tiles the trailing 2D slices left to right.
/// Phase n is white; phases 1..n-1 take palette_color(a).
void render_ppm(const std::filesystem::path& path, const Structure& s, std::size_t block = 32);
std::array<unsigned char, 3> palette_color(int phase, int phases);

}  // namespace eq2pc

#endif  // EQ2PC_IO_HPP
