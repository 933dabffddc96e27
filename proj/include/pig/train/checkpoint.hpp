#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pig/grad/nn.hpp"
#include "pig/grad/optim.hpp"

namespace pig::train {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr char kCheckpointMagic[8] = {'P', 'I', 'G', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Little-endian field stream: magic, version, payload, FNV-1a of everything before it.
class CheckpointWriter {
public:
    CheckpointWriter();
    void u64(std::uint64_t v);
    void f64(double v);
    void boolean(bool v) { u64(v ? 1 : 0); }
    void str(const std::string& s);
    void doubles(std::span<const double> v);
    void params(const grad::ParameterSet& set);
    void adam(const grad::Adam& opt);
    std::string finish() const;

private:
    std::string data_;
};

class CheckpointReader {
public:
    // Verifies magic, version and checksum; throws CheckpointError otherwise.
    explicit CheckpointReader(std::string bytes);
    std::uint64_t u64();
    double f64();
    bool boolean() { return u64() != 0; }
    std::string str();
    std::vector<double> doubles();
    // Names and shapes must match the existing set.
    void params(grad::ParameterSet& set);
    void adam(grad::Adam& opt);
    bool at_end() const { return pos_ == end_; }

private:
    void need(std::size_t n) const;
    std::string data_;
    std::size_t pos_ = 0, end_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

} // namespace pig::train
