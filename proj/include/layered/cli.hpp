#pragma once

#include <iosfwd>
#include <string>

#include "layered/models.hpp"

namespace layered::cli {

inline constexpr const char* version = "0.1.0";

struct RunConfig {
    ModelKind model = ModelKind::QWZ;
    double m = 1.0;
    Stacking stacking = Stacking::ABBA;
    int layers = 2;
    double t = 0.4;
    int axis = 3;
    std::string observable = "auto";  // auto | global | subspace
    int subspace = 0;                  // 0: every r
    int grid = 256;
    std::string out = "out";
    double tol_bis = 1e-6;
    double tol_deg = 1e-9;
    double delta = 1e-4;
    int threads = 0;                   // 0: QT_THREADS, then hardware
    int filled = 0;                    // 0: half filling
    double t_min = 0.0, t_max = 2.0;
    double m_min = -3.0, m_max = 3.0;
    int t_steps = 32, m_steps = 32;
    int chern_grid = 60;
    double sigma1 = 0.0, sigma2 = 0.0, sigma3 = 0.0;
    bool self_generate = false;

    LayeredConfig layered() const;
};

// Applies one key=value setting.  Keys are the long flag names without dashes.
// Throws ConfigError for unknown keys or malformed values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// key=value lines, '#' comments, blank lines ignored.
void load_config_text(RunConfig& cfg, const std::string& text);
void load_config_file(RunConfig& cfg, const std::string& path);

// Exit codes: 0 success, 1 numerical failure, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace layered::cli
