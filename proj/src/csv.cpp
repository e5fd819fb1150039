#include "mpdae/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "mpdae/error.hpp"

namespace mpdae {

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, int line)
{
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
        field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
        field.remove_suffix(1);
    if (!field.empty() && field.front() == '+')
        field.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ParseError("not a number: '" + std::string(field) + "'", line);
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

void write_csv(std::ostream& os, const CsvTable& table)
{
    for (std::size_t j = 0; j < table.header.size(); ++j)
        os << (j ? "," : "") << table.header[j];
    os << "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j)
            os << (j ? "," : "") << format_double(row[j]);
        os << "\r\n";
    }
}

void write_csv(const std::string& path, const CsvTable& table)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("cannot open '" + path + "' for writing");
    write_csv(os, table);
    if (!os)
        throw Error("write to '" + path + "' failed");
}

CsvTable read_csv(std::istream& is)
{
    CsvTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (lineno == 1) {
            t.header = split_csv_line(line);
            continue;
        }
        if (line.empty())
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != t.header.size())
            throw ParseError("expected " + std::to_string(t.header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             lineno);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields)
            row.push_back(parse_double(f, lineno));
        t.rows.push_back(std::move(row));
    }
    if (lineno == 0)
        throw ParseError("empty file", 1);
    return t;
}

std::vector<std::string> trajectory_header(int m, int n_y, int n_z)
{
    std::vector<std::string> h{"t", "nu"};
    for (int i = 1; i <= m; ++i)
        for (int c = 1; c <= n_y; ++c)
            h.push_back("y_" + std::to_string(i) + "_" + std::to_string(c));
    for (int i = 1; i <= m; ++i)
        for (int c = 1; c <= n_z; ++c)
            h.push_back("z_" + std::to_string(i) + "_" + std::to_string(c));
    return h;
}

void write_trajectory(std::ostream& os, const Trajectory& traj)
{
    if (traj.states.empty())
        throw InvalidArgument("cannot write an empty trajectory");
    const GridState& s0 = traj.states.front();
    CsvTable table;
    table.header = trajectory_header(s0.m, s0.n_y, s0.n_z);
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const GridState& s = traj.states[n];
        std::vector<double> row;
        row.reserve(table.header.size());
        row.push_back(traj.times[n]);
        row.push_back(s.nu);
        row.insert(row.end(), s.x1.data(), s.x1.data() + s.x1.size());
        row.insert(row.end(), s.x2.data(), s.x2.data() + s.x2.size());
        table.rows.push_back(std::move(row));
    }
    write_csv(os, table);
}

void write_trajectory(const std::string& path, const Trajectory& traj)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("cannot open '" + path + "' for writing");
    write_trajectory(os, traj);
}

namespace {

/// "y_12_3" -> (12, 3); returns false for other names.
bool parse_grid_column(const std::string& name, char prefix, int& line, int& comp)
{
    if (name.size() < 5 || name[0] != prefix || name[1] != '_')
        return false;
    const auto sep = name.find('_', 2);
    if (sep == std::string::npos)
        return false;
    const char* b = name.data();
    auto r1 = std::from_chars(b + 2, b + sep, line);
    auto r2 = std::from_chars(b + sep + 1, b + name.size(), comp);
    return r1.ec == std::errc() && r1.ptr == b + sep && r2.ec == std::errc() && r2.ptr == b + name.size() &&
           line >= 1 && comp >= 1;
}

} // namespace

Trajectory read_trajectory(std::istream& is)
{
    const CsvTable table = read_csv(is);
    const auto& h = table.header;
    auto find = [&](const std::string& name) {
        const auto it = std::find(h.begin(), h.end(), name);
        return it == h.end() ? -1 : static_cast<int>(it - h.begin());
    };
    const int ct = find("t");
    const int cnu = find("nu");
    if (ct < 0)
        throw ParseError("trajectory header has no 't' column", 1);
    if (cnu < 0)
        throw ParseError("trajectory header has no 'nu' column", 1);

    int m = 0, ny = 0, nz = 0;
    std::map<std::pair<int, int>, int> ycol, zcol;
    for (int j = 0; j < static_cast<int>(h.size()); ++j) {
        int line = 0, comp = 0;
        if (parse_grid_column(h[j], 'y', line, comp)) {
            ycol[{line, comp}] = j;
            m = std::max(m, line);
            ny = std::max(ny, comp);
        } else if (parse_grid_column(h[j], 'z', line, comp)) {
            zcol[{line, comp}] = j;
            m = std::max(m, line);
            nz = std::max(nz, comp);
        } else if (j != ct && j != cnu) {
            throw ParseError("unexpected trajectory column '" + h[j] + "'", 1);
        }
    }
    if (m == 0 || ny == 0 || nz == 0 || static_cast<int>(ycol.size()) != m * ny ||
        static_cast<int>(zcol.size()) != m * nz)
        throw ParseError("trajectory header does not describe a complete grid", 1);

    Trajectory traj;
    int lineno = 1;
    for (const auto& row : table.rows) {
        ++lineno;
        GridState s = GridState::zeros(m, ny, nz);
        for (int i = 1; i <= m; ++i) {
            for (int c = 1; c <= ny; ++c)
                s.x1((i - 1) * ny + c - 1) = row[ycol.at({i, c})];
            for (int c = 1; c <= nz; ++c)
                s.x2((i - 1) * nz + c - 1) = row[zcol.at({i, c})];
        }
        s.nu = row[cnu];
        if (!traj.times.empty() && !(row[ct] > traj.times.back()))
            throw ParseError("times are not increasing", lineno);
        traj.times.push_back(row[ct]);
        traj.nu.push_back(s.nu);
        traj.states.push_back(std::move(s));
        traj.iterations.push_back(0);
    }
    if (traj.states.empty())
        throw ParseError("trajectory has no data rows", 2);
    return traj;
}

Trajectory read_trajectory(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error("cannot open '" + path + "'");
    return read_trajectory(is);
}

} // namespace mpdae
