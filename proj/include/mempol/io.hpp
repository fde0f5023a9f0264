#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mempol {

/// Shortest round-trip decimal form of a double, locale-independent.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// CSV with a header row, "." decimals and "\n" line endings; content is
/// accumulated in memory and flushed in one write so a failed run never
/// leaves a partial file behind.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {
        if (columns_.empty()) throw std::invalid_argument("CsvWriter: no columns");
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) body_ += ',';
            body_ += columns_[i];
        }
        body_ += '\n';
    }

    void row(const std::vector<double>& values) {
        if (values.size() != columns_.size())
            throw std::invalid_argument("CsvWriter: row arity mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) body_ += ',';
            body_ += format_double(values[i]);
        }
        body_ += '\n';
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("CsvWriter: cannot open " + path.string());
        out << body_;
        if (!out) throw std::runtime_error("CsvWriter: write failed for " + path.string());
    }

    const std::string& content() const { return body_; }

  private:
    std::vector<std::string> columns_;
    std::string body_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_text: cannot open " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write_text: write failed for " + path.string());
}

}  // namespace mempol
