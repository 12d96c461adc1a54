#include "lactate/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "lactate/errors.hpp"

namespace lactate::io {

namespace {

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_finite(std::string_view field, std::size_t line_no, const char* column) {
    double value = 0.0;
    const auto* begin = field.data();
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << "line " << line_no << ": column " << column << " value '" << field
            << "' is not a finite number";
        throw FormatError(msg.str());
    }
    return value;
}

}  // namespace

ParseResult parse_csv_text(std::string_view text, const TestProtocol& protocol) {
    ParseResult result;
    std::map<std::string, std::size_t, std::less<>> index_of;

    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;

        if (!header_seen) {
            if (line != kCsvHeader) {
                std::ostringstream msg;
                msg << "line 1: expected header '" << kCsvHeader << "', got '" << line << "'";
                throw FormatError(msg.str());
            }
            header_seen = true;
            continue;
        }

        const std::vector<std::string_view> fields = split_fields(line);
        if (fields.size() != 4) {
            std::ostringstream msg;
            msg << "line " << line_no << ": expected 4 columns, got " << fields.size();
            throw FormatError(msg.str());
        }
        if (fields[0].empty()) {
            std::ostringstream msg;
            msg << "line " << line_no << ": empty athlete_id";
            throw FormatError(msg.str());
        }
        const double speed = parse_finite(fields[1], line_no, "stage_speed_kmh");
        const double lactate = parse_finite(fields[2], line_no, "lactate_mmol_per_l");
        const double pts = parse_finite(fields[3], line_no, "pts_kmh");

        const auto it = index_of.find(fields[0]);
        if (it == index_of.end()) {
            AthleteTest test;
            test.athlete_id = std::string(fields[0]);
            test.protocol = protocol;
            test.pts_kmh = pts;
            test.points.push_back({speed, lactate});
            index_of.emplace(test.athlete_id, result.tests.size());
            result.tests.push_back(std::move(test));
        } else {
            AthleteTest& test = result.tests[it->second];
            if (pts != test.pts_kmh) {
                std::ostringstream msg;
                msg << "line " << line_no << ": PTS " << pts << " differs from earlier value "
                    << test.pts_kmh;
                result.findings.push_back(
                    {test.athlete_id, "inconsistent PTS", "pts_kmh", msg.str()});
            }
            test.points.push_back({speed, lactate});
        }
    }
    if (!header_seen) {
        throw FormatError("empty file: missing header");
    }

    for (const AthleteTest& test : result.tests) {
        const std::vector<ValidationFinding> findings = validate_test(test);
        result.findings.insert(result.findings.end(), findings.begin(), findings.end());
    }
    return result;
}

ParseResult parse_csv_file(const std::filesystem::path& path, const TestProtocol& protocol) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open input file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv_text(buffer.str(), protocol);
}

std::string to_csv(std::span<const AthleteTest> tests) {
    std::string out;
    out += kCsvHeader;
    out += '\n';
    for (const AthleteTest& test : tests) {
        for (const LactatePoint& p : test.points) {
            out += test.athlete_id;
            out += ',';
            out += format_number(p.speed_kmh);
            out += ',';
            out += format_number(p.lactate_mmol_l);
            out += ',';
            out += format_number(test.pts_kmh);
            out += '\n';
        }
    }
    return out;
}

std::string residuals_csv(std::span<const ResidualRecord> residuals) {
    std::string out =
        "athlete_id,reference_lt_kmh,estimated_lt_kmh,residual_s_per_km,"
        "acceptable_limit_s_per_km,within\n";
    for (const ResidualRecord& r : residuals) {
        out += r.athlete_id;
        out += ',';
        out += format_number(r.reference_lt_kmh);
        out += ',';
        out += format_number(r.estimated_lt_kmh);
        out += ',';
        out += format_number(r.residual_s_km);
        out += ',';
        out += format_number(r.acceptable_limit_s_km);
        out += ',';
        out += r.within ? "true" : "false";
        out += '\n';
    }
    return out;
}

std::string error_samples_csv(std::span<const PrecisionErrorSample> samples) {
    std::string out = "point_count,error_pct_ersr,error_kmh\n";
    for (const PrecisionErrorSample& s : samples) {
        out += std::to_string(s.point_count);
        out += ',';
        out += format_number(s.error_pct_ersr);
        out += ',';
        out += format_number(s.error_kmh);
        out += '\n';
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot open output file: " + path.string());
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw FormatError("failed writing output file: " + path.string());
    }
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

std::string format_pace_clock(double min_per_km) {
    if (!std::isfinite(min_per_km) || min_per_km <= 0.0) {
        throw DomainError("format_pace_clock: pace must be finite and > 0");
    }
    long minutes = static_cast<long>(min_per_km);
    double seconds = (min_per_km - static_cast<double>(minutes)) * 60.0;
    seconds = std::round(seconds * 10.0) / 10.0;
    if (seconds >= 60.0) {
        seconds -= 60.0;
        ++minutes;
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%ld:%04.1f", minutes, seconds);
    return buf;
}

}  // namespace lactate::io
