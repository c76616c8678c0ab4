#include "ilw/errors.hpp"
#include "ilw/format.hpp"
#include "ilw/spectral.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace ilw {

std::string fmt_double(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text)
{
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    while (first < last && (*first == ' ' || *first == '\t'))
        ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r'))
        --last;
    if (first < last && *first == '+')
        ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw InvalidInput("not a number: '" + text + "'");
    return v;
}

void write_snapshot_csv(std::ostream& out, const FourierField& field, const std::string& comment)
{
    std::istringstream lines(comment);
    for (std::string line; std::getline(lines, line);)
        out << "# " << line << '\n';
    out << "k,re,im\n";
    const PeriodicGrid& g = field.grid();
    for (int k = g.k_lo(); k < g.k_hi(); ++k) {
        cplx c = field.coeff(k);
        out << k << ',' << fmt_double(c.real()) << ',' << fmt_double(c.imag()) << '\n';
    }
}

FourierField read_snapshot_csv(std::istream& in)
{
    std::string line;
    bool header = false;
    std::vector<int> ks;
    std::vector<cplx> vals;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        if (!header) {
            if (line != "k,re,im")
                throw InvalidInput("snapshot header must be 'k,re,im'");
            header = true;
            continue;
        }
        auto c1 = line.find(',');
        auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw InvalidInput("snapshot line " + std::to_string(lineno) + ": expected three fields");
        int k = 0;
        auto kr = std::from_chars(line.data(), line.data() + c1, k);
        if (kr.ec != std::errc() || kr.ptr != line.data() + c1)
            throw InvalidInput("snapshot line " + std::to_string(lineno) + ": bad mode index");
        ks.push_back(k);
        vals.emplace_back(parse_double(line.substr(c1 + 1, c2 - c1 - 1)), parse_double(line.substr(c2 + 1)));
    }
    if (!header)
        throw InvalidInput("snapshot is missing its header");
    PeriodicGrid grid(static_cast<int>(ks.size()));
    for (std::size_t i = 0; i < ks.size(); ++i)
        if (ks[i] != grid.mode(i))
            throw InvalidInput("snapshot modes must run contiguously from -n/2 to n/2-1");
    return FourierField(grid, std::move(vals));
}

} // namespace ilw
