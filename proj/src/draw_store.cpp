#include "hths/draw_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hths {

namespace {

constexpr std::array<char, 8> kMagic = {'H', 'T', 'H', 'S', 'D', 'R', 'W', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes;
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw std::runtime_error("draw store: truncated file");
  }
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  return v;
}

}  // namespace

DrawStore::DrawStore(std::vector<std::string> names, std::size_t draws, nlohmann::json metadata)
    : names_(std::move(names)), draws_(draws), data_(names_.size(), std::vector<double>(draws)),
      metadata_(std::move(metadata)) {}

bool DrawStore::has(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t DrawStore::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("draw store has no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

void DrawStore::write(std::ostream& out) const {
  nlohmann::json header = metadata_;
  header["columns"] = names_;
  header["draws"] = draws_;
  const std::string text = header.dump();
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  std::vector<char> buffer(8 * draws_);
  for (const auto& col : data_) {
    for (std::size_t r = 0; r < draws_; ++r) {
      const auto bits = std::bit_cast<std::uint64_t>(col[r]);
      for (int k = 0; k < 8; ++k) buffer[8 * r + k] = static_cast<char>((bits >> (8 * k)) & 0xff);
    }
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }
  if (!out) throw std::runtime_error("draw store: write failed");
}

DrawStore DrawStore::read(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("draw store: bad magic");
  }
  const std::uint64_t length = get_u64(in);
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) {
    throw std::runtime_error("draw store: truncated header");
  }
  nlohmann::json header = nlohmann::json::parse(text);
  auto names = header.at("columns").get<std::vector<std::string>>();
  const auto draws = header.at("draws").get<std::size_t>();
  header.erase("columns");
  header.erase("draws");
  DrawStore store(std::move(names), draws, std::move(header));
  std::vector<unsigned char> buffer(8 * draws);
  for (auto& col : store.data_) {
    if (!in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()))) {
      throw std::runtime_error("draw store: truncated column data");
    }
    for (std::size_t r = 0; r < draws; ++r) {
      std::uint64_t bits = 0;
      for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(buffer[8 * r + k]) << (8 * k);
      col[r] = std::bit_cast<double>(bits);
    }
  }
  return store;
}

void DrawStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(out);
}

DrawStore DrawStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read(in);
}

}  // namespace hths
