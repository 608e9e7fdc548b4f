#include "tcam/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string_view>

namespace tcam::io {

namespace {

constexpr std::string_view kTensorTag = "tcam-tensor v1";
constexpr std::string_view kMaskTag = "tcam-mask v1";
constexpr std::string_view kBinaryMagic = "TCAMTNS1";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if constexpr (std::is_floating_point_v<T>) {
        if (!token.empty() && token.front() == '+') ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::string slurp(std::istream& in) { return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}; }

std::string read_file(const std::string& path) {
    if (path == "-") return slurp(std::cin);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return slurp(in);
}

// Line-oriented reader that skips blank and '#' lines and tracks line numbers.
class LineReader {
public:
    LineReader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

    bool next(std::string_view& line) {
        while (pos_ < text_.size()) {
            const auto end = text_.find('\n', pos_);
            const auto stop = end == std::string_view::npos ? text_.size() : end;
            const auto raw = trim(text_.substr(pos_, stop - pos_));
            pos_ = stop + 1;
            ++line_no_;
            if (raw.empty() || raw.front() == '#') continue;
            line = raw;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(source_ + ":" + std::to_string(line_no_) + ": " + what);
    }
    [[noreturn]] void fail_eof(const std::string& what) const {
        throw ParseError(source_ + ": unexpected end of file, " + what);
    }

    std::size_t line_no() const { return line_no_; }
    const std::string& source() const { return source_; }

private:
    std::string_view text_;
    std::string source_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

Shape parse_header(LineReader& reader, std::string_view tag) {
    std::string_view line;
    if (!reader.next(line)) reader.fail_eof("expected '" + std::string(tag) + "' header");
    if (line != tag) reader.fail("expected header '" + std::string(tag) + "', found '" + std::string(line) + "'");

    if (!reader.next(line)) reader.fail_eof("expected 'order <n>'");
    auto fields = split_ws(line);
    std::size_t order = 0;
    if (fields.size() != 2 || fields[0] != "order" || !parse_number(fields[1], order)) {
        reader.fail("expected 'order <n>'");
    }
    if (order == 0) reader.fail("order must be at least 1");
    if (order > kMaxOrder) reader.fail("order " + std::to_string(order) + " exceeds the maximum of " + std::to_string(kMaxOrder));

    if (!reader.next(line)) reader.fail_eof("expected 'shape ...'");
    fields = split_ws(line);
    if (fields.empty() || fields[0] != "shape") reader.fail("expected 'shape ...'");
    if (fields.size() - 1 != order) {
        reader.fail("shape lists " + std::to_string(fields.size() - 1) + " sizes but order is " + std::to_string(order));
    }
    Shape shape(order);
    for (std::size_t m = 0; m < order; ++m) {
        if (!parse_number(fields[m + 1], shape[m]) || shape[m] == 0) {
            reader.fail("invalid mode size '" + std::string(fields[m + 1]) + "'");
        }
    }
    return shape;
}

template <typename T, typename Convert>
std::vector<T> parse_payload(LineReader& reader, std::size_t expected, Convert convert) {
    std::vector<T> values;
    values.reserve(expected);
    std::string_view line;
    while (reader.next(line)) {
        for (auto token : split_ws(line)) {
            T v{};
            if (!convert(token, v)) reader.fail("invalid value '" + std::string(token) + "'");
            values.push_back(v);
        }
    }
    if (values.size() != expected) {
        throw ParseError(reader.source() + ": payload length mismatch: expected " + std::to_string(expected) +
                         " values, found " + std::to_string(values.size()));
    }
    return values;
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint64_t get_u64(std::string_view bytes, std::size_t& offset, const std::string& source) {
    if (offset + 8 > bytes.size()) {
        throw ParseError(source + ": truncated binary tensor at byte " + std::to_string(offset));
    }
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + b])) << (8 * b);
    offset += 8;
    return v;
}

DenseTensor parse_binary_tensor(std::string_view bytes, const std::string& source) {
    std::size_t offset = kBinaryMagic.size();
    const auto order = get_u64(bytes, offset, source);
    if (order == 0 || order > kMaxOrder) {
        throw ParseError(source + ": invalid order " + std::to_string(order) + " at byte 8");
    }
    Shape shape(order);
    for (auto& s : shape) {
        s = get_u64(bytes, offset, source);
        if (s == 0) throw ParseError(source + ": zero mode size at byte " + std::to_string(offset - 8));
    }
    const auto expected = element_count(shape);
    const auto available = (bytes.size() - offset) / 8;
    if (available != expected || (bytes.size() - offset) % 8 != 0) {
        throw ParseError(source + ": payload length mismatch: expected " + std::to_string(expected) +
                         " values, found " + std::to_string(available));
    }
    std::vector<double> data(expected);
    for (auto& v : data) v = std::bit_cast<double>(get_u64(bytes, offset, source));
    return DenseTensor(std::move(shape), std::move(data));
}

DenseTensor parse_tensor_text(std::string_view text, const std::string& source) {
    if (text.substr(0, kBinaryMagic.size()) == kBinaryMagic) return parse_binary_tensor(text, source);
    LineReader reader(text, source);
    Shape shape = parse_header(reader, kTensorTag);
    auto values = parse_payload<double>(reader, element_count(shape),
                                        [](std::string_view tok, double& v) { return parse_number(tok, v); });
    return DenseTensor(std::move(shape), std::move(values));
}

ObservationMask parse_mask_text(std::string_view text, const std::string& source) {
    LineReader reader(text, source);
    Shape shape = parse_header(reader, kMaskTag);
    auto bits = parse_payload<std::uint8_t>(reader, element_count(shape), [](std::string_view tok, std::uint8_t& v) {
        if (tok == "0") v = 0;
        else if (tok == "1") v = 1;
        else return false;
        return true;
    });
    return ObservationMask(std::move(shape), std::move(bits));
}

void write_header(std::ostream& out, std::string_view tag, const Shape& shape) {
    out << tag << "\norder " << shape.size() << "\nshape";
    for (auto s : shape) out << ' ' << s;
    out << '\n';
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

DenseTensor parse_tensor(std::istream& in, const std::string& source) { return parse_tensor_text(slurp(in), source); }

void format_tensor(std::ostream& out, const DenseTensor& t, TensorFormat format) {
    if (format == TensorFormat::Binary) {
        std::string bytes(kBinaryMagic);
        put_u64(bytes, t.order());
        for (auto s : t.shape()) put_u64(bytes, s);
        for (double v : t.data()) put_u64(bytes, std::bit_cast<std::uint64_t>(v));
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        return;
    }
    write_header(out, kTensorTag, t.shape());
    for (double v : t.data()) out << format_double(v) << '\n';
}

DenseTensor read_tensor(const std::string& path) { return parse_tensor_text(read_file(path), path); }

void write_tensor(const std::string& path, const DenseTensor& t, TensorFormat format) {
    std::ostringstream out;
    format_tensor(out, t, format);
    write_atomically(path, out.str());
}

ObservationMask parse_mask(std::istream& in, const std::string& source) { return parse_mask_text(slurp(in), source); }

void format_mask(std::ostream& out, const ObservationMask& m) {
    write_header(out, kMaskTag, m.shape());
    // one mode-1 fiber per line
    const std::size_t width = m.shape().front();
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << (m.observed(i) ? '1' : '0') << ((i + 1) % width == 0 ? '\n' : ' ');
    }
}

ObservationMask read_mask(const std::string& path) { return parse_mask_text(read_file(path), path); }

void write_mask(const std::string& path, const ObservationMask& m) {
    std::ostringstream out;
    format_mask(out, m);
    write_atomically(path, out.str());
}

void write_atomically(const std::string& path, const std::string& contents) {
    if (path == "-") {
        std::cout << contents << std::flush;
        return;
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
    }
}

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& what) {
    std::vector<std::size_t> out;
    std::string_view rest(text);
    while (true) {
        const auto comma = rest.find(',');
        const auto token = trim(rest.substr(0, comma));
        std::size_t v = 0;
        if (!parse_number(token, v) || v == 0) {
            throw std::invalid_argument("invalid " + what + " '" + text + "': entries must be positive integers");
        }
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::string_view rest(text);
    while (true) {
        const auto comma = rest.find(',');
        const auto token = trim(rest.substr(0, comma));
        double v = 0;
        if (!parse_number(token, v)) throw std::invalid_argument("invalid " + what + " '" + text + "'");
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

SweepPlan parse_plan(std::istream& in, const std::string& source) {
    const std::string text = slurp(in);
    LineReader reader(text, source);
    SweepPlan plan;
    bool have_shape = false;
    bool have_rank = false;
    bool have_ratios = false;
    std::string_view line;
    while (reader.next(line)) {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) reader.fail("expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        try {
            if (key == "shape") {
                plan.shape = parse_size_list(value, "shape");
                have_shape = true;
            } else if (key == "rank") {
                plan.rank = parse_size_list(value, "rank");
                have_rank = true;
            } else if (key == "ratios") {
                plan.ratios = parse_double_list(value, "ratios");
                have_ratios = true;
            } else if (key == "trials") {
                plan.trials = parse_size_list(value, "trials").at(0);
            } else if (key == "methods") {
                plan.methods.clear();
                std::string_view rest(value);
                while (true) {
                    const auto comma = rest.find(',');
                    plan.methods.push_back(Method::parse(std::string(trim(rest.substr(0, comma)))));
                    if (comma == std::string_view::npos) break;
                    rest.remove_prefix(comma + 1);
                }
            } else if (key == "seed") {
                if (!parse_number(std::string_view(value), plan.seed)) throw std::invalid_argument("invalid seed");
            } else if (key == "tol") {
                plan.tt.tol = parse_double_list(value, "tol").at(0);
            } else if (key == "max_iter") {
                plan.tt.max_iter = parse_size_list(value, "max_iter").at(0);
            } else if (key == "ridge") {
                plan.tt.ridge = parse_double_list(value, "ridge").at(0);
            } else if (key == "tmm_tol") {
                plan.tmm_tol = parse_double_list(value, "tmm_tol").at(0);
            } else if (key == "tmm_max_iter") {
                plan.tmm_max_iter = parse_size_list(value, "tmm_max_iter").at(0);
            } else {
                reader.fail("unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument& e) {
            reader.fail(e.what());
        }
    }
    if (!have_shape || !have_rank || !have_ratios) throw ParseError(source + ": plan must set shape, rank and ratios");
    try {
        plan.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(source + ": " + e.what());
    }
    return plan;
}

SweepPlan read_plan(const std::string& path) {
    std::istringstream in(read_file(path));
    return parse_plan(in, path);
}

void format_sweep_csv(std::ostream& out, const SweepResult& result) {
    out << "method,obs_ratio,trial,iterations,reme,seconds\n";
    std::array<char, 64> secs{};
    for (const auto& row : result.rows) {
        std::snprintf(secs.data(), secs.size(), "%.6f", row.seconds);
        out << row.method << ',' << format_double(row.ratio) << ',' << row.trial << ',' << row.iterations << ','
            << format_double(row.reme) << ',' << secs.data() << '\n';
    }
}

void format_summary_csv(std::ostream& out, const std::vector<SweepSummaryRow>& rows) {
    out << "method,obs_ratio,mean_reme,median_iterations\n";
    for (const auto& row : rows) {
        out << row.method << ',' << format_double(row.ratio) << ',' << format_double(row.mean_reme) << ','
            << format_double(row.median_iterations) << '\n';
    }
}

}  // namespace tcam::io
