#include "commands.hpp"
#include "options.hpp"

#include "sard/error.hpp"

#include <functional>
#include <iostream>
#include <memory>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

} // namespace

int main(int argc, char** argv) {
    using namespace sard::cli;
    CLI::App app{"SAR speckle simulation, despeckling network training and evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "sard 0.1.0");

    struct Command {
        CLI::App* app;
        std::unique_ptr<CommandOptions> options;
        std::function<int(const nlohmann::json&)> run;
    };
    std::vector<Command> commands;
    auto add = [&](const std::string& name, const std::string& help, std::vector<OptionSpec> specs,
                   std::function<int(const nlohmann::json&)> run) {
        CLI::App* sub = app.add_subcommand(name, help);
        commands.push_back({sub, std::make_unique<CommandOptions>(*sub, name, std::move(specs)), std::move(run)});
    };
    add("simulate", "Sample speckle or Gaussian noise fields, or corrupt an image", simulate_options(), run_simulate);
    add("build-dataset", "Build a training archive from SARG stacks or synthetic truths", build_dataset_options(),
        run_build_dataset);
    add("train", "Train the despeckling network on an archive", train_options(), run_train);
    add("despeckle", "Filter a SARG image with a trained model", despeckle_options(), run_despeckle);
    add("evaluate", "Score a trained model on an archive split", evaluate_options(), run_evaluate);
    add("compare", "Rank the model against the classical filters", compare_options(), run_compare);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }
    for (const auto& c : commands) {
        if (!c.app->parsed()) continue;
        try {
            return c.run(c.options->resolve());
        } catch (const sard::InvalidArgument& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitValidation;
        } catch (const sard::DivergenceError& e) {
            std::cerr << "error: training diverged in " << e.layer() << ": " << e.what() << "\n";
            return kExitRuntime;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitRuntime;
        }
    }
    return kExitValidation;
}
