#pragma once

#include <complex>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "cwt.hpp"
#include "error.hpp"
#include "ingest.hpp"
#include "matrix.hpp"
#include "text.hpp"

namespace wavescope {

/// Row and column labels of an exported (scale x time) matrix.
struct MatrixAxes {
    std::vector<double> scales;
    std::vector<double> frequencies;
    std::vector<std::string> time_labels; ///< ISO dates, or sample indices for undated input
};

struct ImportedMatrix {
    MatrixAxes axes;
    Matrix<double> values;
};

enum class ComplexExport { Parts, Modulus };

/// Axes for a spectrum; `dates`, when non-empty, labels the columns.
inline MatrixAxes spectrum_axes(const ScaleGrid& grid, const MotherWavelet& w, double dt,
                                std::size_t cols, const std::vector<Date>& dates = {})
{
    MatrixAxes axes{grid.scales(), grid_frequencies(w, grid, dt), {}};
    axes.time_labels.reserve(cols);
    for (std::size_t k = 0; k < cols; ++k)
        axes.time_labels.push_back(k < dates.size() ? dates[k].iso() : std::to_string(k));
    return axes;
}

/// CSV text: header "scale,frequency,<time labels>", then one line per scale.
inline std::string matrix_to_csv(const Matrix<double>& m, const MatrixAxes& axes)
{
    if (axes.scales.size() != m.rows() || axes.frequencies.size() != m.rows() || axes.time_labels.size() != m.cols())
        throw InputError("export_matrix: axes do not match a " + std::to_string(m.rows()) + "x"
                         + std::to_string(m.cols()) + " matrix");
    std::string out = "scale,frequency";
    for (const auto& t : axes.time_labels)
        out += "," + t;
    out += "\n";
    for (std::size_t j = 0; j < m.rows(); ++j) {
        out += format_shortest(axes.scales[j]) + "," + format_shortest(axes.frequencies[j]);
        for (double v : m.row(j))
            out += "," + format_shortest(v);
        out += "\n";
    }
    return out;
}

inline void export_matrix(const Matrix<double>& m, const MatrixAxes& axes, const std::filesystem::path& out)
{
    write_file_atomic(out, matrix_to_csv(m, axes));
}

/// Complex matrices go out either as "<stem>_re" / "<stem>_im" siblings or as moduli.
inline std::vector<std::filesystem::path> export_matrix(const Matrix<std::complex<double>>& m, const MatrixAxes& axes,
                                                        const std::filesystem::path& out, ComplexExport mode)
{
    if (mode == ComplexExport::Modulus) {
        export_matrix(map(m, [](const std::complex<double>& c) { return std::abs(c); }), axes, out);
        return {out};
    }
    auto sibling = [&](const char* suffix) {
        auto p = out;
        p.replace_filename(out.stem().string() + suffix + out.extension().string());
        return p;
    };
    const auto re = sibling("_re");
    const auto im = sibling("_im");
    export_matrix(map(m, [](const std::complex<double>& c) { return c.real(); }), axes, re);
    export_matrix(map(m, [](const std::complex<double>& c) { return c.imag(); }), axes, im);
    return {re, im};
}

inline ImportedMatrix import_matrix(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path.string() + ": empty file");
    auto header = split_csv_line(line);
    if (header.size() < 3 || trim(header[0]) != "scale" || trim(header[1]) != "frequency")
        throw ParseError(path.string() + ": row 1: expected header 'scale,frequency,<times...>'");
    ImportedMatrix im;
    im.axes.time_labels.assign(header.begin() + 2, header.end());
    const std::size_t cols = im.axes.time_labels.size();

    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != cols + 2)
            throw ParseError(path.string() + ": row " + std::to_string(line_no) + ": expected "
                             + std::to_string(cols + 2) + " fields, got " + std::to_string(fields.size()));
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto v = parse_double(trim(fields[i]));
            if (!v)
                throw ParseError(path.string() + ": row " + std::to_string(line_no) + ": cannot parse '" + fields[i] + "'");
            if (i == 0)
                im.axes.scales.push_back(*v);
            else if (i == 1)
                im.axes.frequencies.push_back(*v);
            else
                values.push_back(*v);
        }
    }
    if (im.axes.scales.empty())
        throw ParseError(path.string() + ": no data rows");
    im.values = Matrix<double>(im.axes.scales.size(), cols);
    std::copy(values.begin(), values.end(), im.values.data().begin());
    return im;
}

/// Rebuilds a PowerSpectrum from an imported power matrix; the COI is
/// recomputed from the wavelet and sampling interval.
inline PowerSpectrum power_from_import(const ImportedMatrix& im, const MotherWavelet& w, double dt)
{
    return {im.values, ScaleGrid::from_scales(im.axes.scales), dt, cone_of_influence(im.values.cols(), dt, w), w};
}

} // namespace wavescope
