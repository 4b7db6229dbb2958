#pragma once

#include "promptga/orchestrator.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace promptga {

/// Runs `<cmd> --prompt <text> --seed <int> --out <path>` without a shell.
/// Throws IoError when the command cannot start or exits non-zero.
void run_generator_command(const std::string& command, const std::string& prompt, std::uint32_t seed,
                           const std::filesystem::path& out);

/// Materialises the four assets of each (description, set) in a flat,
/// content-addressed directory. Without a generator command assets are
/// placeholders rendered on request.
class AssetStore {
 public:
  explicit AssetStore(const RunConfig& config);

  void ensure(const Run& run, std::int64_t description_id, CandidateId set_id);
  std::optional<std::filesystem::path> file_of(const std::string& name) const;
  static bool valid_name(const std::string& name);
  static std::string placeholder_svg(const std::string& name);

 private:
  std::filesystem::path dir_;
  std::string generator_;
  std::string distractor_;
  std::uint64_t seed_;
};

}  // namespace promptga
