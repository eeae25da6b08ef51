#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace dct::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kFault = 2 };

int cmd_run(const std::filesystem::path& config, const std::filesystem::path& out_dir,
            std::optional<double> dt, std::ostream& log);
int cmd_sweep(const std::filesystem::path& config, const std::filesystem::path& sweep,
              const std::filesystem::path& out_dir, unsigned jobs, std::ostream& log);
int cmd_validate(const std::filesystem::path& config, std::ostream& log);

}  // namespace dct::cli
