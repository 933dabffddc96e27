#include "pig/train/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pig/util/hash.hpp"

namespace pig::train {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

std::uint64_t checksum(const std::string& s, std::size_t n) {
    return fnv1a64(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(s.data()), n));
}

} // namespace

CheckpointWriter::CheckpointWriter() {
    data_.append(kCheckpointMagic, sizeof(kCheckpointMagic));
    u64(kCheckpointVersion);
}

void CheckpointWriter::u64(std::uint64_t v) { data_.append(reinterpret_cast<const char*>(&v), sizeof v); }

void CheckpointWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void CheckpointWriter::str(const std::string& s) {
    u64(s.size());
    data_.append(s);
}

void CheckpointWriter::doubles(std::span<const double> v) {
    u64(v.size());
    for (double x : v) f64(x);
}

void CheckpointWriter::params(const grad::ParameterSet& set) {
    u64(set.entries().size());
    for (const auto& [name, t] : set.entries()) {
        str(name);
        u64(t.shape().size());
        for (auto d : t.shape()) u64(d);
        doubles(t.values());
    }
}

void CheckpointWriter::adam(const grad::Adam& opt) {
    u64(opt.steps());
    u64(opt.skipped());
    doubles(opt.state());
}

std::string CheckpointWriter::finish() const {
    std::string out = data_;
    const std::uint64_t h = checksum(out, out.size());
    out.append(reinterpret_cast<const char*>(&h), sizeof h);
    return out;
}

CheckpointReader::CheckpointReader(std::string bytes) : data_(std::move(bytes)) {
    if (data_.size() < sizeof(kCheckpointMagic) + 16 || std::memcmp(data_.data(), kCheckpointMagic, 8) != 0)
        throw CheckpointError("not a checkpoint file (bad magic)");
    end_ = data_.size() - 8;
    std::uint64_t stored = 0;
    std::memcpy(&stored, data_.data() + end_, 8);
    const std::uint64_t actual = checksum(data_, end_);
    if (stored != actual)
        throw CheckpointError("checkpoint hash mismatch: stored " + hex64(stored) + ", computed " + hex64(actual));
    pos_ = 8;
    const auto version = u64();
    if (version != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
}

void CheckpointReader::need(std::size_t n) const {
    if (pos_ + n > end_) throw CheckpointError("checkpoint truncated");
}

std::uint64_t CheckpointReader::u64() {
    need(8);
    std::uint64_t v = 0;
    std::memcpy(&v, data_.data() + pos_, 8);
    pos_ += 8;
    return v;
}

double CheckpointReader::f64() { return std::bit_cast<double>(u64()); }

std::string CheckpointReader::str() {
    const auto n = u64();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
}

std::vector<double> CheckpointReader::doubles() {
    const auto n = u64();
    need(n * 8);
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
}

void CheckpointReader::params(grad::ParameterSet& set) {
    const auto count = u64();
    if (count != set.entries().size()) throw CheckpointError("checkpoint parameter count mismatch");
    for (const auto& [name, t] : set.entries()) {
        const auto stored = str();
        if (stored != name) throw CheckpointError("checkpoint parameter '" + stored + "' where '" + name + "' expected");
        const auto rank = u64();
        if (rank != t.shape().size()) throw CheckpointError("checkpoint shape mismatch for " + name);
        for (std::size_t i = 0; i < rank; ++i)
            if (u64() != t.shape()[i]) throw CheckpointError("checkpoint shape mismatch for " + name);
        const auto values = doubles();
        if (values.size() != t.numel()) throw CheckpointError("checkpoint size mismatch for " + name);
        grad::Tensor handle = t;
        std::copy(values.begin(), values.end(), handle.mutable_values().begin());
    }
}

void CheckpointReader::adam(grad::Adam& opt) {
    const auto steps = u64();
    const auto skipped = u64();
    opt.load_state(doubles(), steps, skipped);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CheckpointError("cannot write '" + tmp + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw CheckpointError("write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw CheckpointError("cannot move checkpoint into '" + path + "'");
}

} // namespace pig::train
