#include "eq2pc/database.hpp"

#include <algorithm>
#include <cstdio>

namespace eq2pc {

namespace {

Factors factors_from_json(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw FormatError(std::string("parameters need a \"") + key + "\" array");
  std::vector<std::size_t> z;
  for (const auto& v : j.at(key)) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
      throw FormatError(std::string("\"") + key + "\" entries must be positive integers");
    z.push_back(v.get<std::size_t>());
  }
  return Factors(std::move(z));
}

Json record_to_json(const DerivationRecord& r) {
  Json j;
  j["id"] = r.id;
  j["parents"] = r.parents;
  j["operation"] = r.operation;
  j["parameters"] = r.parameters;
  j["child"] = r.child;
  return j;
}

}  // namespace

Structure apply_operation(const std::string& operation, const Json& parameters, const std::vector<Structure>& parents) {
  if (parents.size() != 1) throw std::invalid_argument("operations take exactly one parent");
  const Structure& s = parents.front();
  if (operation == "phase_extend") return phase_extend(s, factors_from_json(parameters, "z"));
  if (operation == "kernel_extend") {
    if (!parameters.is_object() || !parameters.contains("z")) return kernel_extend(s, kernels_from_json(parameters));
    Json kernels = parameters;
    kernels.erase("z");
    return kernel_extend(s, kernels_from_json(kernels), factors_from_json(parameters, "z"));
  }
  if (operation == "coalesce") return coalesce(s, plan_from_json(parameters));
  if (operation == "upsample") return upsample(s, factors_from_json(parameters, "factor"));
  throw std::invalid_argument("unknown operation \"" + operation + "\"");
}

std::string structure_id(const Structure& s) { return sha256_hex(serialize_structure(s)).substr(0, 16); }

DerivationDatabase::DerivationDatabase(std::filesystem::path dir) : dir_(std::move(dir)), lock_(dir_ / ".lock") {
  std::filesystem::create_directories(dir_ / "structures");
  std::FILE* f = std::fopen(lock_.c_str(), "wx");
  if (!f) throw DatabaseLocked("database " + dir_.string() + " is locked (remove " + lock_.string() + " if stale)");
  std::fclose(f);
  try {
    const auto index = dir_ / "derivations.json";
    if (std::filesystem::exists(index)) {
      const Json j = read_json_file(index);
      for (const auto& r : j.at("records"))
        records_.push_back({r.at("id").get<std::string>(), r.at("parents").get<std::vector<std::string>>(),
                            r.at("operation").get<std::string>(), r.at("parameters"), r.at("child").get<std::string>()});
    }
  } catch (...) {
    std::filesystem::remove(lock_);
    throw;
  }
}

DerivationDatabase::~DerivationDatabase() {
  std::error_code ec;
  std::filesystem::remove(lock_, ec);
}

std::filesystem::path DerivationDatabase::structure_path(const std::string& id) const {
  return dir_ / "structures" / (id + ".json");
}

std::string DerivationDatabase::add_structure(const Structure& s, const Json& meta) {
  const std::string id = structure_id(s);
  const auto path = structure_path(id);
  if (!std::filesystem::exists(path)) save_structure(path, s, meta);
  return id;
}

Structure DerivationDatabase::structure(const std::string& id) const { return load_structure(structure_path(id)).structure; }

const DerivationRecord& DerivationDatabase::record(const std::string& operation, const Json& parameters,
                                                   const std::vector<std::string>& parents, const std::string& child) {
  DerivationRecord r{"", parents, operation, parameters, child};
  Json body = record_to_json(r);
  body.erase("id");
  r.id = sha256_hex(body.dump()).substr(0, 16);
  auto it = std::find_if(records_.begin(), records_.end(), [&](const DerivationRecord& x) { return x.id == r.id; });
  if (it != records_.end()) return *it;
  records_.push_back(std::move(r));
  return records_.back();
}

void DerivationDatabase::flush() const {
  std::vector<const DerivationRecord*> sorted;
  for (const auto& r : records_) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  Json list = Json::array();
  for (const auto* r : sorted) list.push_back(record_to_json(*r));
  Json j;
  j["records"] = list;
  write_text_file(dir_ / "derivations.json", j.dump(1) + "\n");
}

std::vector<std::string> DerivationDatabase::replay() const {
  std::vector<std::string> mismatched;
  for (const auto& r : records_) {
    std::vector<Structure> parents;
    for (const auto& p : r.parents) parents.push_back(structure(p));
    const Structure result = apply_operation(r.operation, r.parameters, parents);
    if (!(result == structure(r.child))) mismatched.push_back(r.id);
  }
  std::sort(mismatched.begin(), mismatched.end());
  return mismatched;
}

}  // namespace eq2pc
