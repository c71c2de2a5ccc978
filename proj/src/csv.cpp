#include "blendloop/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

namespace blendloop {

CsvError::CsvError(std::size_t line_no, const std::string& what)
    : InvalidInput("line " + std::to_string(line_no) + ": " + what), line(line_no)
{
}

std::string format_number(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
bool parse_full(std::string_view text, T& value)
{
    if (text.empty())
        return false;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

} // namespace

Series<double> read_series_csv(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line))
        throw CsvError(1, "empty input, expected header 'i,value'");
    ++line_no;
    std::string_view header = trim(line);
    if (header.starts_with("\xEF\xBB\xBF"))
        header.remove_prefix(3);
    if (header != "i,value")
        throw CsvError(line_no, "expected header 'i,value', got '" + std::string(header) + "'");

    std::vector<double> values;
    std::int64_t last_index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto cells = split(line);
        if (cells.size() != 2)
            throw CsvError(line_no, "expected 2 columns, got " + std::to_string(cells.size()));
        std::int64_t index = 0;
        if (!parse_full(cells[0], index))
            throw CsvError(line_no, "index '" + std::string(cells[0]) + "' is not an integer");
        if (!values.empty() && index <= last_index)
            throw CsvError(line_no, "index " + std::to_string(index) + " is not increasing");
        double value = 0;
        if (!parse_full(cells[1], value))
            throw CsvError(line_no, "value '" + std::string(cells[1]) + "' is not a number");
        if (!std::isfinite(value))
            throw CsvError(line_no, "value is not finite");
        values.push_back(value);
        last_index = index;
    }
    if (values.empty())
        throw CsvError(line_no, "no observations");
    return Eigen::Map<const Series<double>>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Series<double> read_series_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open '" + path.string() + "'");
    return read_series_csv(in);
}

void write_series_csv(std::ostream& out, const Series<double>& series, std::int64_t first_index)
{
    out << "i,value\n";
    for (Eigen::Index k = 0; k < series.size(); ++k)
        out << first_index + k << ',' << format_number(series(k)) << '\n';
}

void write_chart_csv(std::ostream& out, const ControlChart<double>& chart)
{
    out << "idx,point,center,ucl,lcl,signal\n";
    const std::string center = format_number(chart.center);
    const std::string ucl = format_number(chart.ucl);
    const std::string lcl = format_number(chart.lcl);
    for (Eigen::Index k = 0; k < chart.points.size(); ++k) {
        const bool signal =
            std::binary_search(chart.signals.begin(), chart.signals.end(), k);
        out << k + 1 << ',' << format_number(chart.points(k)) << ',' << center << ',' << ucl << ','
            << lcl << ',' << (signal ? 1 : 0) << '\n';
    }
}

// u is the rate chosen after measuring z_i, i.e. u_i.
void write_trace_csv(std::ostream& out, const SimTrace& trace)
{
    out << "i,x,u,y,z,clamped\n";
    for (Eigen::Index k = 0; k < trace.z.size(); ++k) {
        const auto i = static_cast<std::size_t>(k + 1);
        const bool clamped = std::binary_search(trace.clamp_events.begin(),
                                                trace.clamp_events.end(), i);
        out << i << ',' << format_number(trace.x(k)) << ',' << format_number(trace.u(k + 1)) << ','
            << format_number(trace.y(k)) << ',' << format_number(trace.z(k)) << ','
            << (clamped ? 1 : 0) << '\n';
    }
}

void write_summary_header(std::ostream& out)
{
    out << "rule,n_reps,horizon,mean_z,var_z,abs_offset\n";
}

void write_summary_row(std::ostream& out, const std::string& rule, const ReplicationSummary& s)
{
    out << rule << ',' << s.n_reps << ',' << s.horizon << ',' << format_number(s.mean_z) << ','
        << format_number(s.var_z) << ',' << format_number(std::abs(s.mean_z - s.tau)) << '\n';
}

void write_per_step_csv(std::ostream& out, const Series<double>& per_step_mean_z)
{
    out << "i,mean_z\n";
    for (Eigen::Index k = 0; k < per_step_mean_z.size(); ++k)
        out << k + 1 << ',' << format_number(per_step_mean_z(k)) << '\n';
}

void write_surface_csv(std::ostream& out, std::span<const SurfacePoint> surface)
{
    out << "lambda1,lambda2,objective\n";
    for (const auto& p : surface)
        out << format_number(p.lambda1) << ',' << format_number(p.lambda2) << ','
            << format_number(p.objective) << '\n';
}

} // namespace blendloop
