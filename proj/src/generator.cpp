#include "promptga/generator.hpp"

#include "promptga/errors.hpp"

#include <spawn.h>
#include <sys/wait.h>

#include <sstream>

extern char** environ;

namespace promptga {

void run_generator_command(const std::string& command, const std::string& prompt, std::uint32_t seed,
                           const std::filesystem::path& out) {
  std::vector<std::string> args;
  std::istringstream words(command);
  for (std::string w; words >> w;) args.push_back(w);
  if (args.empty()) throw ConfigError("generator command is empty");
  args.insert(args.end(), {"--prompt", prompt, "--seed", std::to_string(seed), "--out", out.string()});
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = 0;
  if (const int rc = posix_spawnp(&pid, argv[0], nullptr, nullptr, argv.data(), environ); rc != 0)
    throw IoError("cannot start generator '" + args[0] + "'");
  int status = 0;
  if (waitpid(pid, &status, 0) < 0) throw IoError("waiting for generator failed");
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw IoError("generator '" + args[0] + "' failed for prompt '" + prompt + "'");
}

AssetStore::AssetStore(const RunConfig& config)
    : dir_(config.asset_dir),
      generator_(config.generator_command),
      distractor_(config.distractor_command),
      seed_(config.seed) {}

bool AssetStore::valid_name(const std::string& name) {
  if (name.size() != 16) return false;
  for (char c : name)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

void AssetStore::ensure(const Run& run, std::int64_t description_id, CandidateId set_id) {
  if (generator_.empty()) return;
  const auto names = run.asset_names(description_id, set_id);
  std::filesystem::create_directories(dir_);
  const bool weak = is_distractor(set_id);
  // Distractors fall back to the main generator on the bare description.
  const auto& command = weak && !distractor_.empty() ? distractor_ : generator_;
  const auto prompt = weak && distractor_.empty() ? run.inputs().description(description_id).text
                                                  : run.prompt_of(description_id, set_id);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto path = dir_ / names[i];
    if (std::filesystem::exists(path)) continue;
    const auto seed = static_cast<std::uint32_t>(
        derive_seed(seed_, {static_cast<std::uint64_t>(description_id), static_cast<std::uint64_t>(set_id), i}) &
        0x7fffffffu);
    run_generator_command(command, prompt, seed, path);
  }
}

std::optional<std::filesystem::path> AssetStore::file_of(const std::string& name) const {
  if (!valid_name(name)) return std::nullopt;
  const auto path = dir_ / name;
  if (!std::filesystem::exists(path)) return std::nullopt;
  return path;
}

std::string AssetStore::placeholder_svg(const std::string& name) {
  // Colour from the name so the two sides look different.
  const auto colour = name.substr(0, 6);
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"256\" height=\"256\">"
         "<rect width=\"256\" height=\"256\" fill=\"#" +
         colour + "\"/><text x=\"16\" y=\"132\" font-family=\"monospace\" font-size=\"18\" fill=\"#fff\">" + name +
         "</text></svg>";
}

}  // namespace promptga
