#include "options.hpp"

#include "sard/error.hpp"

#include <algorithm>
#include <fstream>

namespace sard::cli {

std::string flag_of(const std::string& key) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    return flag;
}

namespace {

nlohmann::json parse_as(const std::string& key, const std::string& text, const nlohmann::json& like) {
    try {
        std::size_t used = 0;
        switch (like.type()) {
        case nlohmann::json::value_t::number_unsigned: {
            if (text.empty() || text.front() == '-') throw std::invalid_argument("negative");
            const unsigned long long v = std::stoull(text, &used);
            if (used != text.size()) throw std::invalid_argument("trailing");
            return v;
        }
        case nlohmann::json::value_t::number_integer: {
            const long long v = std::stoll(text, &used);
            if (used != text.size()) throw std::invalid_argument("trailing");
            return v;
        }
        case nlohmann::json::value_t::number_float: {
            const double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument("trailing");
            return v;
        }
        case nlohmann::json::value_t::boolean:
            if (text == "true" || text == "1") return true;
            if (text == "false" || text == "0") return false;
            throw std::invalid_argument("boolean");
        default:
            return text;
        }
    } catch (const std::exception&) {
        throw InvalidArgument("invalid value for " + flag_of(key) + ": '" + text + "'");
    }
}

/// Checks a config-file value against the type of the default.
nlohmann::json coerce(const std::string& key, const nlohmann::json& value, const nlohmann::json& like) {
    if (value.is_string() && !like.is_string() && !like.is_null()) return parse_as(key, value.get<std::string>(), like);
    const bool ok = (like.is_number() && value.is_number()) || (like.is_boolean() && value.is_boolean()) ||
                    (like.is_string() && value.is_string()) || like.is_null();
    if (!ok) throw InvalidArgument("config key '" + key + "' has the wrong type");
    if (like.is_number_unsigned() && value.is_number_integer() && value.get<long long>() < 0) {
        throw InvalidArgument("config key '" + key + "' must be nonnegative");
    }
    return value;
}

} // namespace

CommandOptions::CommandOptions(CLI::App& app, std::string name, std::vector<OptionSpec> specs)
    : name_(std::move(name)), specs_(std::move(specs)) {
    app.add_option("--config", config_path_, "Run-config JSON (as written next to earlier outputs)");
    for (const auto& s : specs_) {
        std::string help = s.help;
        if (!s.fallback.is_null()) help += " [default: " + (s.fallback.is_string() ? s.fallback.get<std::string>() : s.fallback.dump()) + "]";
        if (s.fallback.is_boolean()) {
            options_[s.key] = app.add_flag(flag_of(s.key), raw_[s.key], help + " (--" +
                                           flag_of(s.key).substr(2) + "=false to disable)");
        } else {
            options_[s.key] = app.add_option(flag_of(s.key), raw_[s.key], help);
        }
    }
}

nlohmann::json CommandOptions::resolve() const {
    nlohmann::json resolved = nlohmann::json::object();
    for (const auto& s : specs_) resolved[s.key] = s.fallback;
    if (!config_path_.empty()) {
        std::ifstream in(config_path_);
        if (!in) throw InvalidArgument("cannot open config file " + config_path_);
        nlohmann::json file;
        try {
            file = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw InvalidArgument("config file " + config_path_ + " is not valid JSON: " + e.what());
        }
        if (file.contains("command") && file.contains("config")) {
            if (file.at("command") != name_) {
                throw InvalidArgument("config file was written by '" + file.at("command").get<std::string>() +
                                      "', not '" + name_ + "'");
            }
            file = file.at("config");
        }
        if (!file.is_object()) throw InvalidArgument("config file must hold a JSON object");
        for (const auto& [key, value] : file.items()) {
            if (!resolved.contains(key)) throw InvalidArgument("unknown config key '" + key + "' for " + name_);
            resolved[key] = coerce(key, value, resolved[key]);
        }
    }
    for (const auto& s : specs_) {
        if (options_.at(s.key)->count() > 0) resolved[s.key] = parse_as(s.key, raw_.at(s.key), s.fallback);
    }
    return resolved;
}

} // namespace sard::cli
