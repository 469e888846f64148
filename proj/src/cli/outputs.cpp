#include <fstream>
#include <system_error>

#include "commands.hpp"

namespace utrad::cli {

void OutputSet::add(const std::string& name, std::string content) {
  files_.emplace_back(name, std::move(content));
}

std::vector<std::filesystem::path> OutputSet::commit() const {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  auto roll_back = [&] {
    std::error_code ignored;
    for (const auto& p : written) fs::remove(p, ignored);
  };
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw InputError("cannot create output directory " + dir_.string() + ": " + ec.message());
  for (const auto& [name, content] : files_) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (out) {
      written.push_back(path);
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      out.close();
    }
    if (!out) {
      roll_back();
      throw InputError("failed writing " + path.string());
    }
  }
  return written;
}

std::uint64_t Context::require_seed(const char* command) const {
  if (!config.seed) {
    throw UsageError(std::string(command) + " needs a seed: pass --seed or set run.seed in the config");
  }
  return *config.seed;
}

}  // namespace utrad::cli
