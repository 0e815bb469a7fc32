#ifndef EQ2PC_DATABASE_HPP
#define EQ2PC_DATABASE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "eq2pc/io.hpp"

namespace eq2pc {

struct DerivationRecord {
  std::string id;
  std::vector<std::string> parents;  ///< structure ids
  std::string operation;             ///< phase_extend, kernel_extend, coalesce or upsample
  Json parameters;
  std::string child;                 ///< structure id
};

/// Applies a recorded operation. Parameters:
///   phase_extend  {"z":[..]}
///   kernel_extend {"dims":[..],"kernels":[..]} plus an optional "z":[..]
///   coalesce      {"mapping":[..]}
///   upsample      {"factor":[..]}
Structure apply_operation(const std::string& operation, const Json& parameters, const std::vector<Structure>& parents);

/// First 16 hex digits of the SHA-256 of the canonical serialization.
std::string structure_id(const Structure& s);

class DatabaseLocked : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Directory holding structures/<id>.json and derivations.json. Opening
/// takes an exclusive lock file, released on destruction.
class DerivationDatabase {
 public:
  explicit DerivationDatabase(std::filesystem::path dir);
  ~DerivationDatabase();
  DerivationDatabase(const DerivationDatabase&) = delete;
  DerivationDatabase& operator=(const DerivationDatabase&) = delete;

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path structure_path(const std::string& id) const;

  /// Stores the structure (idempotent) and returns its id.
  std::string add_structure(const Structure& s, const Json& meta = nullptr);
  Structure structure(const std::string& id) const;

  const DerivationRecord& record(const std::string& operation, const Json& parameters,
                                 const std::vector<std::string>& parents, const std::string& child);
  const std::vector<DerivationRecord>& records() const { return records_; }

  /// Writes derivations.json, records sorted by id.
  void flush() const;

  /// Re-applies every record; returns the ids of records whose result
  /// differs from the stored child.
  std::vector<std::string> replay() const;

 private:
  std::filesystem::path dir_;
  std::filesystem::path lock_;
  std::vector<DerivationRecord> records_;
};

}  // namespace eq2pc

#endif  // EQ2PC_DATABASE_HPP
