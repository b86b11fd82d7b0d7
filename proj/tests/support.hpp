#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "gbias/gbias.hpp"
#include "oracles.hpp"

namespace testing {

inline gbias::EmbeddingSpace space_of(const oracle::Table& t, bool normalized = false) {
  std::vector<std::string> words;
  std::vector<double> data;
  std::size_t dim = t.begin()->second.size();
  for (const auto& [w, v] : t) {
    words.push_back(w);
    data.insert(data.end(), v.begin(), v.end());
  }
  return gbias::EmbeddingSpace(words, data, dim, "test", normalized);
}

inline oracle::Table table_of(const gbias::EmbeddingSpace& s) {
  oracle::Table t;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto r = s.row(i);
    t[s.word(i)] = oracle::Vec(r.begin(), r.end());
  }
  return t;
}

inline oracle::Table random_table(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                                  const std::string& prefix = "w") {
  oracle::Table t;
  for (std::size_t i = 0; i < n; ++i) t[prefix + std::to_string(i)] = oracle::random_unit(rng, dim);
  return t;
}

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("gbias_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path file(const std::string& name) const { return path_ / name; }
  std::filesystem::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name, std::ios::binary) << text;
    return path_ / name;
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Captures warnings for the lifetime of the guard.
class WarningCapture {
 public:
  WarningCapture() : saved_(gbias::warning_sink()) {
    gbias::warning_sink() = [this](const std::string& m) { messages.push_back(m); };
  }
  ~WarningCapture() { gbias::warning_sink() = saved_; }
  std::vector<std::string> messages;

 private:
  gbias::WarningSink saved_;
};

}  // namespace testing
