#include "niforge/system_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace niforge {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

Matrix matrix_from_json(const json& value, const std::string& key) {
    if (!value.is_array())
        throw IoError("key '" + key + "': expected an array of rows");
    const auto nrows = static_cast<Eigen::Index>(value.size());
    Eigen::Index ncols = 0;
    if (nrows > 0) {
        if (!value[0].is_array())
            throw IoError("key '" + key + "': rows must be arrays of numbers");
        ncols = static_cast<Eigen::Index>(value[0].size());
    }
    Matrix M(nrows, ncols);
    for (Eigen::Index i = 0; i < nrows; ++i) {
        const json& row = value[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != ncols)
            throw IoError("key '" + key + "': ragged rows");
        for (Eigen::Index j = 0; j < ncols; ++j) {
            const json& cell = row[static_cast<std::size_t>(j)];
            if (!cell.is_number())
                throw IoError("key '" + key + "': non-numeric entry at row " +
                              std::to_string(i));
            M(i, j) = cell.get<double>();
        }
    }
    return M;
}

json system_to_json(const StateSpace& sys, const std::string& name) {
    json doc;
    if (!name.empty()) doc["name"] = name;
    doc["A"] = matrix_to_json(sys.A());
    doc["B"] = matrix_to_json(sys.B());
    doc["C"] = matrix_to_json(sys.C());
    doc["D"] = matrix_to_json(sys.D());
    return doc;
}

StateSpace system_from_json(const json& doc) {
    if (!doc.is_object()) throw IoError("system document must be a JSON object");
    for (const char* key : {"A", "B", "C", "D"})
        if (!doc.contains(key)) throw IoError(std::string("key '") + key + "' missing");
    try {
        Matrix A = matrix_from_json(doc["A"], "A");
        Matrix B = matrix_from_json(doc["B"], "B");
        Matrix C = matrix_from_json(doc["C"], "C");
        Matrix D = matrix_from_json(doc["D"], "D");
        // A zero-row B serializes as [] and loses its column count; D always
        // carries the channel count.
        if (A.rows() == 0 && B.rows() == 0) B.resize(0, D.cols());
        return StateSpace(std::move(A), std::move(B), std::move(C), std::move(D));
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("invalid system: ") + e.what());
    }
}

NamedSystem load_system(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw IoError("malformed JSON in '" + path.string() + "': " + e.what());
    }
    std::string name;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) throw IoError("key 'name': expected a string");
        name = doc["name"].get<std::string>();
    }
    return {system_from_json(doc), std::move(name)};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    fs::create_directories(dir);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out.good()) throw IoError("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

void save_system(const StateSpace& sys, const std::filesystem::path& path,
                 const std::string& name) {
    write_file_atomic(path, system_to_json(sys, name).dump(2) + "\n");
}

void write_csv_atomic(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "");
    out << "\n";
    char buf[40];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << buf << (i + 1 < row.size() ? "," : "");
        }
        out << "\n";
    }
    write_file_atomic(path, out.str());
}

}  // namespace niforge
