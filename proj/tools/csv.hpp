#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "xpi/version.hpp"

namespace xpi::cli {

/// CSV with a fixed preamble: artifact version and master seed as comment
/// lines, then the header row. Doubles print with %.17g so identical runs
/// reproduce identical bytes.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, unsigned long seed, const std::vector<std::string>& columns)
        : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
        out_ << "# xpi_version=" << kVersion << "\n";
        out_ << "# seed=" << seed << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
    }

    static std::string num(double x) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return buf;
    }
    static std::string num(long x) { return std::to_string(x); }
    static std::string num(int x) { return std::to_string(x); }

  private:
    std::ofstream out_;
};

}  // namespace xpi::cli
