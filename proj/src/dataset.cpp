#include "causalbound/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace causalbound {

int Dataset::col(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    throw DatasetError("dataset has no column: " + name);
}

Matrix Dataset::column(const std::string& name) const { return values.col(col(name)); }

std::vector<double> Dataset::column_vec(const std::string& name) const {
    int c = col(name);
    std::vector<double> out(values.rows());
    for (int i = 0; i < values.rows(); ++i) out[i] = values(i, c);
    return out;
}

void Dataset::validate(const CausalGraph& g) const {
    if (static_cast<int>(columns.size()) != values.cols())
        throw DatasetError("column binding count != matrix width");
    std::set<std::string> seen;
    for (const auto& c : columns) {
        if (!g.has_node(c)) throw DatasetError("column not in graph: " + c);
        if (!seen.insert(c).second) throw DatasetError("duplicate column: " + c);
    }
    if (static_cast<int>(seen.size()) != g.size())
        throw DatasetError("dataset does not cover every observed node");
    for (size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i])) throw DatasetError("non-finite value in dataset");
}

double Dataset::mean(int c) const {
    double s = 0.0;
    for (int i = 0; i < values.rows(); ++i) s += values(i, c);
    return s / values.rows();
}

double Dataset::stddev(int c) const {
    double m = mean(c), s = 0.0;
    for (int i = 0; i < values.rows(); ++i) {
        double d = values(i, c) - m;
        s += d * d;
    }
    return std::sqrt(s / values.rows());
}

void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DatasetError("cannot write csv: " + path);
    for (size_t i = 0; i < data.columns.size(); ++i)
        out << data.columns[i] << (i + 1 == data.columns.size() ? "" : ",");
    out << "\n";
    char buf[64];
    for (int r = 0; r < data.values.rows(); ++r) {
        for (int c = 0; c < data.values.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", data.values(r, c));
            out << buf << (c + 1 == data.values.cols() ? "" : ",");
        }
        out << "\n";
    }
}

Dataset read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DatasetError("empty csv: " + path);
    // strip a potential BOM and trailing CR
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    Dataset data;
    {
        std::istringstream hs(line);
        std::string tok;
        while (std::getline(hs, tok, ',')) data.columns.push_back(tok);
    }
    const int d = static_cast<int>(data.columns.size());
    std::vector<double> flat;
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        int c = 0;
        while (std::getline(ls, tok, ',')) {
            if (c >= d) throw DatasetError(path + ": too many fields on data row");
            try {
                flat.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw DatasetError(path + ": bad numeric field '" + tok + "'");
            }
            ++c;
        }
        if (c != d) throw DatasetError(path + ": expected " + std::to_string(d) + " fields");
        ++rows;
    }
    data.values = Matrix(rows, d);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < d; ++c) data.values(r, c) = flat[static_cast<size_t>(r) * d + c];
    data.source = path;
    return data;
}

}  // namespace causalbound
