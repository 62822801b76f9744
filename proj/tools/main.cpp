// cglres: resonant-averaging toolkit for the weakly nonlinear CGL/NLS flow
// on the torus.  Subcommands: resonances | simulate | compare | conserve.
#include <string>

#include "CLI11.hpp"

#include "cgl/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"resonant averaging toolkit for weakly nonlinear CGL/NLS runs"};
    app.require_subcommand(1);

    cgl::CliOptions opt;
    std::string chosen;
    const char* names[] = {"resonances", "simulate", "compare", "conserve"};
    const char* blurbs[] = {
        "build or load resonance tables and report counts",
        "integrate the full and/or effective flow, write artifacts",
        "paired full/effective comparison or an epsilon ladder",
        "run the applicable conservation checks",
    };
    for (int i = 0; i < 4; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
        sub->add_option("--config", opt.config_path, "run configuration file")
            ->required();
        sub->add_option("--cache", opt.cache_dir,
                        "resonance-table cache directory (overrides CGLRES_CACHE)");
        sub->add_option("--out", opt.out_dir, "artifact output directory");
        sub->add_option("--jobs", opt.jobs, "worker count for ladders and tables");
        sub->add_flag("--force", opt.force,
                      "overwrite artifacts whose config hash differs");
        sub->callback([&chosen, name = names[i]] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return cgl::dispatch(chosen, opt);
}
