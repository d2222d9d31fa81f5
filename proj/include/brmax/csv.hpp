#ifndef BRMAX_CSV_HPP
#define BRMAX_CSV_HPP

#include <Eigen/Dense>
#include <string>

namespace brmax {

// Plain numeric CSV, no header, %.17g formatting so values round-trip.
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m);
void write_csv_vector(const std::string& path, const Eigen::VectorXd& v);
Eigen::MatrixXd read_csv_matrix(const std::string& path);
Eigen::VectorXd read_csv_vector(const std::string& path);

std::string format_double(double x);

}  // namespace brmax

#endif  // BRMAX_CSV_HPP
