#pragma once

#include "CLI11.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace sard::cli {

/// One command-line option mirrored by a key of the run config.
struct OptionSpec {
    std::string key;
    nlohmann::json fallback;
    std::string help;
};

/// Options of one subcommand, resolved as defaults <- --config file <- explicit flags.
/// The value type of every key is taken from its default.
class CommandOptions {
public:
    CommandOptions(CLI::App& app, std::string name, std::vector<OptionSpec> specs);

    /// Called after parsing; throws InvalidArgument for malformed values.
    nlohmann::json resolve() const;
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
    std::vector<OptionSpec> specs_;
    std::map<std::string, std::string> raw_;
    std::map<std::string, CLI::Option*> options_;
    std::string config_path_;
};

/// "--flag-name" for key "flag_name".
std::string flag_of(const std::string& key);

} // namespace sard::cli
