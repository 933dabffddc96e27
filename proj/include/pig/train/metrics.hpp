#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pig::train {

struct MetricsRow {
    std::size_t env_step = 0;
    double wall_time = 0.0;
    double J = 0.0;   // mean undiscounted evaluation return
    double J_c = 0.0; // mean undiscounted evaluation cost
    double L_dyn = 0.0, L_align = 0.0, L_dec = 0.0, L_pred = 0.0;
    double actor_loss = 0.0, critic_r_loss = 0.0, critic_c_loss = 0.0;
    double lambda_p = 0.0, mu_k = 0.0;
    double entropy = 0.0;
    double kl_star_minus = 0.0;
    std::size_t updates = 0; // gradient updates contributing to the loss columns
    std::string config_hash;

    bool operator==(const MetricsRow&) const = default;
};

const std::vector<std::string>& metrics_header();
std::string format_row(const MetricsRow& row);
MetricsRow parse_row(const std::vector<std::string>& fields);

// Reads a metrics file written by MetricsWriter.
std::vector<MetricsRow> read_metrics(const std::string& path);

class MetricsWriter {
public:
    // Truncates and writes the header unless `append` is set.
    MetricsWriter(std::string path, bool append);
    void write(const MetricsRow& row);
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

} // namespace pig::train
