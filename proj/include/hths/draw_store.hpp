#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace hths {

// Retained draws of a chain, one column per scalar parameter.
//
// On disk: the 8 bytes "HTHSDRW1", a little-endian u64 header length, a JSON
// header of that many bytes, then every column in header order as
// little-endian float64 values (column-major).
class DrawStore {
 public:
  DrawStore() = default;
  DrawStore(std::vector<std::string> names, std::size_t draws, nlohmann::json metadata = nlohmann::json::object());

  std::size_t draws() const { return draws_; }
  std::size_t columns() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  bool has(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws std::out_of_range

  std::span<const double> column(std::size_t j) const { return data_[j]; }
  std::span<const double> column(std::string_view name) const { return data_[index_of(name)]; }
  std::span<double> column(std::size_t j) { return data_[j]; }

  // Free-form description (family, n, config, seed, priors) carried in the
  // file header next to the column names.
  const nlohmann::json& metadata() const { return metadata_; }
  nlohmann::json& metadata() { return metadata_; }

  void write(std::ostream& out) const;
  static DrawStore read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static DrawStore load(const std::filesystem::path& path);

  friend bool operator==(const DrawStore&, const DrawStore&) = default;

 private:
  std::vector<std::string> names_;
  std::size_t draws_ = 0;
  std::vector<std::vector<double>> data_;
  nlohmann::json metadata_ = nlohmann::json::object();
};

}  // namespace hths
