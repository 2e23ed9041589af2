#include "felis/npy.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "felis/error.hpp"

namespace felis::npy {

static_assert(std::endian::native == std::endian::little,
              "NPY reader/writer assumes a little-endian host");

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kPreamble = 10;  // magic, version, header length

// Minimal reader for the Python dict literal in an NPY header.
class HeaderParser {
public:
    HeaderParser(const std::string& text, std::size_t base, std::string source)
        : text_(text), base_(base), source_(std::move(source)) {}

    struct Value {
        std::optional<std::string> str;
        std::optional<bool> boolean;
        std::optional<std::vector<long long>> tuple;
        std::size_t offset = 0;
    };

    std::map<std::string, Value> parse() {
        std::map<std::string, Value> out;
        skip_space();
        expect('{');
        while (true) {
            skip_space();
            if (peek() == '}') {
                ++pos_;
                break;
            }
            const std::string key = string_literal();
            skip_space();
            expect(':');
            skip_space();
            out[key] = value();
            skip_space();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            skip_space();
            expect('}');
            break;
        }
        return out;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw FormatError(source_ + ": NPY header: " + what, base_ + pos_);
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    void expect(char ch) {
        if (peek() != ch) fail(std::string("expected '") + ch + "'");
        ++pos_;
    }

    std::string string_literal() {
        const char quote = peek();
        if (quote != '\'' && quote != '"') fail("expected a quoted string");
        ++pos_;
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != quote) ++pos_;
        if (pos_ >= text_.size()) fail("unterminated string");
        std::string s = text_.substr(start, pos_ - start);
        ++pos_;
        return s;
    }

    long long integer() {
        const std::size_t start = pos_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        if (start == pos_) fail("expected an integer");
        try {
            return std::stoll(text_.substr(start, pos_ - start));
        } catch (const std::out_of_range&) {
            fail("integer out of range");
        }
    }

    Value value() {
        Value v;
        v.offset = base_ + pos_;
        const char ch = peek();
        if (ch == '\'' || ch == '"') {
            v.str = string_literal();
        } else if (text_.compare(pos_, 4, "True") == 0) {
            v.boolean = true;
            pos_ += 4;
        } else if (text_.compare(pos_, 5, "False") == 0) {
            v.boolean = false;
            pos_ += 5;
        } else if (ch == '(') {
            ++pos_;
            std::vector<long long> dims;
            while (true) {
                skip_space();
                if (peek() == ')') {
                    ++pos_;
                    break;
                }
                dims.push_back(integer());
                skip_space();
                if (peek() == ',') {
                    ++pos_;
                } else if (peek() != ')') {
                    fail("malformed shape tuple");
                }
            }
            v.tuple = std::move(dims);
        } else {
            fail("unsupported header value");
        }
        return v;
    }

    const std::string& text_;
    std::size_t base_;
    std::string source_;
    std::size_t pos_ = 0;
};

}  // namespace

Matrix parse(const std::string& bytes, const std::string& source) {
    if (bytes.size() < kPreamble || bytes.compare(0, kMagicLen, kMagic, kMagicLen) != 0) {
        throw FormatError(source + ": not an NPY file (bad magic)", 0);
    }
    const auto major = static_cast<unsigned char>(bytes[6]);
    const auto minor = static_cast<unsigned char>(bytes[7]);
    if (major != 1 || minor != 0) {
        throw FormatError(source + ": unsupported NPY version " + std::to_string(major) + "." +
                              std::to_string(minor) + " (expected 1.0)",
                          6);
    }
    const std::size_t header_len = static_cast<unsigned char>(bytes[8]) |
                                   (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    if (bytes.size() < kPreamble + header_len) {
        throw FormatError(source + ": truncated NPY header", bytes.size());
    }
    const std::string header = bytes.substr(kPreamble, header_len);
    const auto fields = HeaderParser(header, kPreamble, source).parse();

    const auto field = [&](const char* key) -> const HeaderParser::Value& {
        const auto it = fields.find(key);
        if (it == fields.end()) {
            throw FormatError(source + ": NPY header lacks '" + key + "'", kPreamble);
        }
        return it->second;
    };
    const auto& descr = field("descr");
    const auto& fortran = field("fortran_order");
    const auto& shape = field("shape");

    if (!descr.str) throw FormatError(source + ": descr must be a string", descr.offset);
    std::size_t item = 0;
    bool wide = false;
    if (*descr.str == "<f4") {
        item = 4;
    } else if (*descr.str == "<f8") {
        item = 8;
        wide = true;
    } else if (*descr.str == ">f4" || *descr.str == ">f8") {
        throw FormatError(source + ": big-endian dtype " + *descr.str +
                              " is not supported (expected little-endian <f4 or <f8)",
                          descr.offset);
    } else {
        throw FormatError(source + ": unsupported dtype '" + *descr.str + "' (expected <f4 or <f8)",
                          descr.offset);
    }
    if (!fortran.boolean) throw FormatError(source + ": fortran_order must be a bool", fortran.offset);
    if (*fortran.boolean) {
        throw FormatError(source + ": Fortran-ordered arrays are not supported", fortran.offset);
    }
    if (!shape.tuple || shape.tuple->size() != 2) {
        throw FormatError(source + ": array must be 2-D", shape.offset);
    }
    const auto rows = static_cast<std::size_t>((*shape.tuple)[0]);
    const auto cols = static_cast<std::size_t>((*shape.tuple)[1]);

    const std::size_t data_offset = kPreamble + header_len;
    const std::size_t expected = rows * cols * item;
    const std::size_t available = bytes.size() - data_offset;
    if (available != expected) {
        throw FormatError(source + ": data section holds " + std::to_string(available) +
                              " bytes, shape requires " + std::to_string(expected),
                          bytes.size());
    }

    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    const char* data = bytes.data() + data_offset;
    for (std::size_t k = 0; k < rows * cols; ++k) {
        double v = 0.0;
        if (wide) {
            std::memcpy(&v, data + k * 8, 8);
        } else {
            float f = 0.0f;
            std::memcpy(&f, data + k * 4, 4);
            v = static_cast<double>(f);
        }
        if (!std::isfinite(v)) {
            throw FormatError(source + ": non-finite value at element " + std::to_string(k),
                              data_offset + k * item);
        }
        m(static_cast<Eigen::Index>(k / cols), static_cast<Eigen::Index>(k % cols)) = v;
    }
    return m;
}

Matrix read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("cannot open feature file " + path.string());
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse(bytes, path.string());
}

std::string serialize(const Matrix& m, DType dtype) {
    const bool wide = dtype == DType::Float64;
    std::ostringstream dict;
    dict << "{'descr': '" << (wide ? "<f8" : "<f4") << "', 'fortran_order': False, 'shape': ("
         << m.rows() << ", " << m.cols() << "), }";
    std::string header = dict.str();
    const std::size_t unpadded = kPreamble + header.size() + 1;
    header.append((64 - unpadded % 64) % 64, ' ');
    header.push_back('\n');

    std::string out(kMagic, kMagicLen);
    out.push_back('\x01');
    out.push_back('\x00');
    out.push_back(static_cast<char>(header.size() & 0xff));
    out.push_back(static_cast<char>((header.size() >> 8) & 0xff));
    out += header;
    const std::size_t item = wide ? 8 : 4;
    const std::size_t start = out.size();
    out.resize(start + static_cast<std::size_t>(m.size()) * item);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c, ++k) {
            if (wide) {
                const double v = m(r, c);
                std::memcpy(out.data() + start + k * 8, &v, 8);
            } else {
                const auto f = static_cast<float>(m(r, c));
                std::memcpy(out.data() + start + k * 4, &f, 4);
            }
        }
    }
    return out;
}

void write(const std::filesystem::path& path, const Matrix& m, DType dtype) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidInput("cannot write feature file " + path.string());
    }
    const std::string bytes = serialize(m, dtype);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace felis::npy
