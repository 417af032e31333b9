#include "qelogit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace qelogit {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        std::size_t b = 0;
        while (b < field.size() && field[b] == ' ') ++b;
        out.push_back(field.substr(b));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

long parse_int(const std::string& s, const std::string& context) {
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw DataError(context + ": cannot parse integer '" + s + "'");
    return v;
}

double parse_double(const std::string& s, const std::string& context) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty())
        throw DataError(context + ": cannot parse number '" + s + "'");
    return v;
}

struct RawRow {
    long time = 0;
    int y = 0;
    std::vector<double> x;
};

}  // namespace

std::string format_double(double v) {
    char buf[40];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

PanelDataset ingest_csv(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) throw DataError(origin + ": empty file");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "id" || header[1] != "time" || header[2] != "y")
        throw DataError(origin + ": header must start with id,time,y");

    PanelDataset ds;
    ds.labels.assign(header.begin() + 3, header.end());
    ds.k = static_cast<int>(ds.labels.size());

    std::vector<std::string> id_order;
    std::map<std::string, std::map<long, RawRow>> by_id;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError(origin + ", line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        const std::string& id = fields[0];
        const std::string where_time = origin + ": id " + id;
        RawRow row;
        row.time = parse_int(fields[1], where_time);
        const std::string where = origin + ": id " + id + ", time " + std::to_string(row.time);
        const long yv = parse_int(fields[2], where);
        if (yv != 0 && yv != 1)
            throw DataError(where + ": response must be 0 or 1 (got " + std::to_string(yv) + ")");
        row.y = static_cast<int>(yv);
        if (row.time < -1) throw DataError(where + ": time must be >= -1");
        row.x.reserve(static_cast<std::size_t>(ds.k));
        for (int j = 0; j < ds.k; ++j)
            row.x.push_back(parse_double(fields[static_cast<std::size_t>(3 + j)], where));
        auto& unit_rows = by_id[id];
        if (unit_rows.empty()) id_order.push_back(id);
        if (!unit_rows.emplace(row.time, std::move(row)).second)
            throw DataError(where + ": duplicate occasion");
    }
    if (id_order.empty()) throw DataError(origin + ": no data rows");

    // Every unit must cover the same occasions: 0..T, optionally led by -1.
    const auto& first_rows = by_id[id_order.front()];
    const bool has_presample = first_rows.count(-1) > 0;
    const long T = static_cast<long>(first_rows.size()) - 1 - (has_presample ? 1 : 0);
    if (T < 2)
        throw DataError(origin + ": panels need at least two response occasions (found T=" +
                        std::to_string(T) + ")");

    ds.T = static_cast<int>(T);
    for (const std::string& id : id_order) {
        const auto& rows = by_id[id];
        for (long t = has_presample ? -1 : 0; t <= T; ++t)
            if (!rows.count(t))
                throw DataError(origin + ": id " + id + ": missing occasion " + std::to_string(t));
        if (rows.size() != static_cast<std::size_t>(T + 1 + (has_presample ? 1 : 0))) {
            const long extra = rows.rbegin()->first;
            throw DataError(origin + ": id " + id + ": unexpected occasion " +
                            std::to_string(extra > T ? extra : rows.begin()->first));
        }

        PanelUnit unit;
        unit.id = id;
        if (has_presample) {
            unit.y_minus1 = rows.at(-1).y;
            unit.x_minus1 = rows.at(-1).x;
        }
        unit.y0 = rows.at(0).y;
        unit.x0 = rows.at(0).x;
        unit.y.resize(static_cast<std::size_t>(T));
        unit.X = Matrix(static_cast<std::size_t>(T), static_cast<std::size_t>(ds.k));
        for (long t = 1; t <= T; ++t) {
            const RawRow& r = rows.at(t);
            unit.y[static_cast<std::size_t>(t - 1)] = r.y;
            for (int j = 0; j < ds.k; ++j) unit.X(static_cast<std::size_t>(t - 1), j) = r.x[j];
        }
        ds.units.push_back(std::move(unit));
    }
    validate_dataset(ds);
    return ds;
}

PanelDataset ingest_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return ingest_csv(in, path);
}

void export_csv(const PanelDataset& ds, std::ostream& out) {
    out << "id,time,y";
    for (const std::string& label : ds.labels) out << ',' << label;
    out << '\n';
    auto write_row = [&](const std::string& id, long t, int y, const std::vector<double>& x) {
        out << id << ',' << t << ',' << y;
        for (int j = 0; j < ds.k; ++j)
            out << ',' << format_double(j < static_cast<int>(x.size()) ? x[j] : 0.0);
        out << '\n';
    };
    for (std::size_t i = 0; i < ds.units.size(); ++i) {
        const PanelUnit& u = ds.units[i];
        const std::string id = u.id.empty() ? std::to_string(i + 1) : u.id;
        if (u.y_minus1)
            write_row(id, -1, *u.y_minus1,
                      u.x_minus1 ? *u.x_minus1 : std::vector<double>(ds.k, 0.0));
        write_row(id, 0, u.y0, u.x0);
        for (int t = 1; t <= ds.T; ++t) {
            std::vector<double> x(static_cast<std::size_t>(ds.k));
            for (int j = 0; j < ds.k; ++j) x[static_cast<std::size_t>(j)] = u.X(t - 1, j);
            write_row(id, t, u.y[static_cast<std::size_t>(t - 1)], x);
        }
    }
}

void export_csv(const PanelDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    export_csv(ds, out);
}

std::string fit_result_to_json(const FitResult& result,
                               const std::vector<ConfInterval>* intervals, double level) {
    nlohmann::json params = nlohmann::json::array();
    const std::vector<double> est = result.theta_hat.to_vector();
    for (std::size_t j = 0; j < est.size(); ++j) {
        nlohmann::json p{
            {"name", result.param_names[j]},
            {"estimate", est[j]},
            {"se", result.se[j]},
        };
        if (intervals) {
            p["ci_lower"] = (*intervals)[j].lower;
            p["ci_upper"] = (*intervals)[j].upper;
        }
        params.push_back(std::move(p));
    }
    nlohmann::json info = nlohmann::json::array();
    for (std::size_t r = 0; r < result.info.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < result.info.cols(); ++c) row.push_back(result.info(r, c));
        info.push_back(std::move(row));
    }
    nlohmann::json j{
        {"converged", result.converged},
        {"parameters", std::move(params)},
        {"loglik", result.loglik},
        {"iterations", result.iterations},
        {"actual_n", result.actual_n},
        {"nominal_terms", result.nominal_terms},
        {"information", std::move(info)},
    };
    if (intervals) j["ci_level"] = level;
    return j.dump(2);
}

}  // namespace qelogit
