#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mpdae/integrator.hpp"

namespace mpdae {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// Strict parse of a whole field; throws ParseError tagged with line.
double parse_double(std::string_view field, int line);

std::vector<std::string> split_csv_line(const std::string& line);

struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& os, const CsvTable& table);
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(std::istream& is);

/// Column names t, nu, y_<line>_<component>..., z_<line>_<component>... (1-based).
std::vector<std::string> trajectory_header(int m, int n_y, int n_z);

void write_trajectory(std::ostream& os, const Trajectory& traj);
void write_trajectory(const std::string& path, const Trajectory& traj);

/// Inverse of write_trajectory for the state columns; diagnostics are not stored.
Trajectory read_trajectory(std::istream& is);
Trajectory read_trajectory(const std::string& path);

} // namespace mpdae
