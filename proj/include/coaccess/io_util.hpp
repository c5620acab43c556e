#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace coaccess {

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file '" + path.string() + "'");
  return in;
}

/// Staged output files: everything is written to `<name>.tmp` siblings and
/// renamed into place only by commit(). A run that fails mid-way leaves no
/// partial outputs behind.
class AtomicFileSet {
 public:
  AtomicFileSet() = default;
  AtomicFileSet(const AtomicFileSet&) = delete;
  AtomicFileSet& operator=(const AtomicFileSet&) = delete;

  ~AtomicFileSet() {
    if (committed_) return;
    std::error_code ec;
    for (auto& staged : files_) {
      staged->stream.close();
      std::filesystem::remove(staged->temp_path, ec);
    }
  }

  std::ostream& add(const std::filesystem::path& final_path) {
    auto staged = std::make_unique<Staged>();
    staged->final_path = final_path;
    staged->temp_path = final_path;
    staged->temp_path += ".tmp";
    staged->stream.open(staged->temp_path, std::ios::binary | std::ios::trunc);
    if (!staged->stream) {
      throw std::runtime_error("cannot open output file '" + staged->temp_path.string() +
                               "'");
    }
    files_.push_back(std::move(staged));
    return files_.back()->stream;
  }

  void commit() {
    for (auto& staged : files_) {
      staged->stream.flush();
      if (!staged->stream) {
        throw std::runtime_error("failed writing '" + staged->temp_path.string() + "'");
      }
      staged->stream.close();
    }
    for (auto& staged : files_) {
      std::filesystem::rename(staged->temp_path, staged->final_path);
    }
    committed_ = true;
  }

 private:
  struct Staged {
    std::filesystem::path final_path;
    std::filesystem::path temp_path;
    std::ofstream stream;
  };

  std::vector<std::unique_ptr<Staged>> files_;
  bool committed_ = false;
};

}  // namespace coaccess
