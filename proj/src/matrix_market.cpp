#include "sstep/errors.hpp"
#include "sstep/operators.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace sstep {

void write_matrix_market(std::ostream& out, const SparseMatrix& a, bool symmetric) {
    if (symmetric && !a.is_symmetric()) throw Error("matrix market: matrix is not symmetric");
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.n(); ++i)
        for (Index c : a.row_cols(i))
            if (!symmetric || static_cast<std::size_t>(c) <= i) ++count;

    out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
    out << a.n() << ' ' << a.n() << ' ' << count << '\n';
    const auto old_precision = out.precision(17);
    for (std::size_t i = 0; i < a.n(); ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (symmetric && static_cast<std::size_t>(cols[k]) > i) continue;
            out << i + 1 << ' ' << cols[k] + 1 << ' ' << vals[k] << '\n';
        }
    }
    out.precision(old_precision);
}

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("matrix market: empty input");
    std::string lower = line;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower.rfind("%%matrixmarket", 0) != 0) throw Error("matrix market: missing banner");
    std::istringstream banner(lower);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (object != "matrix" || format != "coordinate") throw Error("matrix market: only coordinate matrices supported");
    if (field != "real" && field != "integer") throw Error("matrix market: only real fields supported");
    if (symmetry != "symmetric" && symmetry != "general") throw Error("matrix market: unsupported symmetry " + symmetry);
    const bool symmetric = symmetry == "symmetric";

    while (std::getline(in, line))
        if (!line.empty() && line[0] != '%') break;
    std::istringstream size_line(line);
    std::size_t rows = 0, cols = 0, entries = 0;
    if (!(size_line >> rows >> cols >> entries)) throw Error("matrix market: bad size line");
    if (rows != cols) throw DimensionError("matrix market: matrix is not square");

    std::vector<SparseMatrix::Triplet> triplets;
    triplets.reserve(symmetric ? 2 * entries : entries);
    for (std::size_t k = 0; k < entries; ++k) {
        long long i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) throw Error("matrix market: truncated entry list");
        if (i < 1 || j < 1 || static_cast<std::size_t>(i) > rows || static_cast<std::size_t>(j) > rows)
            throw DimensionError("matrix market: entry index out of range");
        triplets.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), v});
        if (symmetric && i != j) triplets.push_back({static_cast<Index>(j - 1), static_cast<Index>(i - 1), v});
    }
    return SparseMatrix::from_triplets(rows, std::move(triplets));
}

} // namespace sstep
