#include "smoothlab/errors.hpp"
#include "smoothlab/lab.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace smoothlab::lab {

namespace fs = std::filesystem;

const char* const kTrajectoryHeader = "layer,hfc_lfc,mean_cosine,effective_rank,frobenius_log,direction_delta";

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json number(double x) {
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    return x;
}

double number_from(const json& j) {
    if (j.is_number())
        return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
        if (s == "nan")
            return std::numeric_limits<double>::quiet_NaN();
    }
    raise(ErrorKind::InvalidArgument, "expected a number, got " + j.dump());
}

json matrix_to_json(const RealMatrix& m) {
    json data = json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            data.push_back(number(m(i, j)));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

// Accepts {"rows","cols","data"} (row-major) or a nested array of rows.
RealMatrix matrix_from_json(const json& j) {
    if (j.is_object()) {
        if (!j.contains("rows") || !j.contains("cols") || !j.contains("data"))
            raise(ErrorKind::InvalidArgument, "matrix object needs rows, cols and data");
        const auto rows = j.at("rows").get<Index>(), cols = j.at("cols").get<Index>();
        const json& data = j.at("data");
        if (rows < 1 || cols < 1 || !data.is_array() || Index(data.size()) != rows * cols)
            raise(ErrorKind::InvalidArgument, "matrix data length does not match rows·cols");
        RealMatrix m(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index c = 0; c < cols; ++c)
                m(i, c) = number_from(data[static_cast<std::size_t>(i * cols + c)]);
        return m;
    }
    if (j.is_array() && !j.empty() && j[0].is_array()) {
        const auto rows = Index(j.size()), cols = Index(j[0].size());
        if (cols < 1)
            raise(ErrorKind::InvalidArgument, "matrix rows are empty");
        RealMatrix m(rows, cols);
        for (Index i = 0; i < rows; ++i) {
            if (!j[i].is_array() || Index(j[i].size()) != cols)
                raise(ErrorKind::InvalidArgument, "ragged matrix rows");
            for (Index c = 0; c < cols; ++c)
                m(i, c) = number_from(j[i][c]);
        }
        return m;
    }
    raise(ErrorKind::InvalidArgument, "not a matrix");
}

json complex_to_json(Complex z) { return json{{"re", number(z.real())}, {"im", number(z.imag())}}; }

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = kTrajectoryHeader;
    out += '\n';
    for (const auto& r : traj.records) {
        out += std::to_string(r.layer);
        for (double v : {r.metrics.hfc_lfc, r.metrics.mean_cosine, r.metrics.effective_rank, r.frobenius_log,
                         r.direction_delta}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        raise(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    f << text;
    if (!f)
        raise(ErrorKind::Io, "write to " + path.string() + " failed");
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) { write_text(path, trajectory_csv(traj)); }

std::vector<TrajectoryRecord> read_trajectory_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f)
        raise(ErrorKind::Io, "cannot open " + path.string());
    std::string line;
    if (!std::getline(f, line) || line != kTrajectoryHeader)
        raise(ErrorKind::InvalidArgument, path.string() + ": unexpected CSV header");
    std::vector<TrajectoryRecord> out;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ','))
            cells.push_back(cell);
        if (cells.size() != 6)
            raise(ErrorKind::InvalidArgument, path.string() + ": expected 6 columns in '" + line + "'");
        double v[6];
        for (int k = 0; k < 6; ++k) {
            char* end = nullptr;
            v[k] = std::strtod(cells[k].c_str(), &end);
            if (end == cells[k].c_str() || *end != '\0')
                raise(ErrorKind::InvalidArgument, path.string() + ": bad number '" + cells[k] + "'");
        }
        TrajectoryRecord r;
        r.layer = static_cast<int>(v[0]);
        r.metrics = {v[1], v[2], v[3]};
        r.frobenius_log = v[4];
        r.direction_delta = v[5];
        out.push_back(r);
    }
    return out;
}

json read_json(const fs::path& path) {
    std::ifstream f(path);
    if (!f)
        raise(ErrorKind::Io, "cannot open " + path.string());
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        raise(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

RealMatrix read_matrix(const fs::path& path) {
    const json j = read_json(path);
    try {
        return matrix_from_json(j);
    } catch (const json::exception& e) {
        raise(ErrorKind::InvalidArgument, path.string() + ": " + e.what());
    }
}

} // namespace smoothlab::lab
