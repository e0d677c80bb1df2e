#ifndef CZREACH_SERIALIZE_HPP
#define CZREACH_SERIALIZE_HPP

#include "czreach/sets.hpp"

#include <json.hpp>

#include <string>

namespace czreach
{

using Json = nlohmann::json;

// Matrices are row-major nested arrays. Doubles are written with round-trip
// precision so that parse(dump(x)) == x bit for bit.
Json to_json(const Matrix& M);
Json to_json(const Vector& v);
Json to_json(const ExpMatrix& E);

// Throws ParseError with the offending key in the message.
Matrix matrix_from_json(const Json& j, const std::string& what);
Vector vector_from_json(const Json& j, const std::string& what);
Eigen::MatrixXi int_matrix_from_json(const Json& j, const std::string& what);

// Keys c, G, E, A, b, R, id plus "shape" {n, h, p, nc, q} so that empty
// blocks keep their extents.
Json to_json(const CPZ& S);
CPZ cpz_from_json(const Json& j);

// Keys C, Glist, E, Alist, B, R, id plus "shape".
Json to_json(const CPMZ& S);
CPMZ cpmz_from_json(const Json& j);

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

Json to_json(const FactorAssignment& sigma);
FactorAssignment assignment_from_json(const Json& j);

} // namespace czreach

#endif
