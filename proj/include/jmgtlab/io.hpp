#pragma once

// CSV serialization and run manifests.  Numbers are written with 17
// significant digits via std::to_chars, which is locale-independent and
// round-trip exact for doubles, so identical runs produce identical bytes.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "propagator.hpp"

namespace jmgtlab {

inline std::string format_double(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

class CsvWriter {
public:
    explicit CsvWriter(std::string header) { out_ = std::move(header) + "\n"; }

    CsvWriter& field(double x) {
        sep();
        out_ += format_double(x);
        return *this;
    }
    CsvWriter& field(long long x) {
        sep();
        out_ += std::to_string(x);
        return *this;
    }
    CsvWriter& field(int x) { return field(static_cast<long long>(x)); }
    CsvWriter& field(const std::string& s) {
        sep();
        out_ += s;
        return *this;
    }
    void end_row() {
        out_ += "\n";
        first_ = true;
    }
    const std::string& str() const { return out_; }

private:
    void sep() {
        if (!first_) out_ += ",";
        first_ = false;
    }
    std::string out_;
    bool first_ = true;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << content;
}

/// `t,E0,E1,E,calE,frakE,h0tau,h1tau,h2tau`
inline std::string energy_csv(const std::vector<EnergySample>& samples) {
    CsvWriter w("t,E0,E1,E,calE,frakE,h0tau,h1tau,h2tau");
    for (const auto& s : samples) {
        w.field(s.t).field(s.E0).field(s.E1).field(s.E).field(s.calE).field(s.frakE);
        w.field(s.h0tau).field(s.h1tau).field(s.h2tau);
        w.end_row();
    }
    return w.str();
}

} // namespace jmgtlab
