#include "pig/train/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pig/util/csv.hpp"

namespace pig::train {

const std::vector<std::string>& metrics_header() {
    static const std::vector<std::string> h{"env_step",      "wall_time",     "J",        "J_c",   "L_dyn",
                                            "L_align",       "L_dec",         "L_pred",   "actor_loss",
                                            "critic_r_loss", "critic_c_loss", "lambda_p", "mu_k",  "entropy",
                                            "kl_star_minus", "updates",       "config_hash"};
    return h;
}

std::string format_row(const MetricsRow& r) {
    using csv::format_double;
    return csv::join_row({std::to_string(r.env_step), format_double(r.wall_time), format_double(r.J),
                          format_double(r.J_c), format_double(r.L_dyn), format_double(r.L_align),
                          format_double(r.L_dec), format_double(r.L_pred), format_double(r.actor_loss),
                          format_double(r.critic_r_loss), format_double(r.critic_c_loss), format_double(r.lambda_p),
                          format_double(r.mu_k), format_double(r.entropy), format_double(r.kl_star_minus),
                          std::to_string(r.updates), r.config_hash});
}

MetricsRow parse_row(const std::vector<std::string>& f) {
    if (f.size() != metrics_header().size()) throw std::runtime_error("metrics row has wrong field count");
    auto d = [&](std::size_t i) {
        if (f[i] == "nan") return std::nan("");
        double v = 0.0;
        const auto res = std::from_chars(f[i].data(), f[i].data() + f[i].size(), v);
        if (res.ec != std::errc{} || res.ptr != f[i].data() + f[i].size())
            throw std::runtime_error("metrics: bad number '" + f[i] + "'");
        return v;
    };
    MetricsRow r;
    r.env_step = std::stoull(f[0]);
    r.wall_time = d(1);
    r.J = d(2);
    r.J_c = d(3);
    r.L_dyn = d(4);
    r.L_align = d(5);
    r.L_dec = d(6);
    r.L_pred = d(7);
    r.actor_loss = d(8);
    r.critic_r_loss = d(9);
    r.critic_c_loss = d(10);
    r.lambda_p = d(11);
    r.mu_k = d(12);
    r.entropy = d(13);
    r.kl_star_minus = d(14);
    r.updates = std::stoull(f[15]);
    r.config_hash = f[16];
    return r;
}

std::vector<MetricsRow> read_metrics(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open metrics file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto rows = csv::parse(buf.str());
    if (rows.empty() || rows.front() != metrics_header()) throw std::runtime_error("metrics header mismatch");
    std::vector<MetricsRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) out.push_back(parse_row(rows[i]));
    return out;
}

MetricsWriter::MetricsWriter(std::string path, bool append) : path_(std::move(path)) {
    if (append) return;
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write metrics file '" + path_ + "'");
    out << csv::join_row(metrics_header()) << "\n";
}

void MetricsWriter::write(const MetricsRow& row) {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot append to metrics file '" + path_ + "'");
    out << format_row(row) << "\n";
}

} // namespace pig::train
