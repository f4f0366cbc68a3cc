#include "elevleak/geodata.hpp"

#include "elevleak/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>

namespace elevleak::geodata {

namespace {

// Minimal pull parser for the GPX subset. It tracks tag nesting so malformed
// nesting is rejected, extracts attributes on <trkpt>, and collects text for
// <ele> and <time> children. Namespaces, extensions, and all other elements
// are skipped.
class GpxScanner {
public:
    explicit GpxScanner(std::string_view in) : in_(in) {}

    Route run() {
        Route route;
        skip_bom();
        while (pos_ < in_.size()) {
            const std::size_t lt = in_.find('<', pos_);
            if (lt == std::string_view::npos) {
                if (!only_whitespace(pos_)) throw MalformedXml("stray text outside markup");
                break;
            }
            capture_text(pos_, lt);
            pos_ = lt;
            dispatch_tag(route);
        }
        if (!stack_.empty()) throw MalformedXml("unclosed element <" + stack_.back() + ">");
        if (in_trkpt_) throw MalformedXml("unterminated trkpt");
        if (route.points.size() < 2) throw EmptyTrack();
        return route;
    }

private:
    void skip_bom() {
        if (in_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
    }

    bool only_whitespace(std::size_t from) const {
        for (std::size_t i = from; i < in_.size(); ++i)
            if (!std::isspace(static_cast<unsigned char>(in_[i]))) return false;
        return true;
    }

    void capture_text(std::size_t from, std::size_t to) {
        if (capturing_) text_.append(in_.substr(from, to - from));
    }

    void dispatch_tag(Route& route) {
        if (starts_with("<?")) {
            advance_past("?>", "unterminated processing instruction");
        } else if (starts_with("<!--")) {
            advance_past("-->", "unterminated comment");
        } else if (starts_with("<!")) {
            advance_past(">", "unterminated declaration");
        } else if (starts_with("</")) {
            close_tag(route);
        } else {
            open_tag(route);
        }
    }

    bool starts_with(std::string_view prefix) const {
        return in_.substr(pos_, prefix.size()) == prefix;
    }

    void advance_past(std::string_view terminator, const char* what) {
        const std::size_t end = in_.find(terminator, pos_);
        if (end == std::string_view::npos) throw MalformedXml(what);
        pos_ = end + terminator.size();
    }

    void close_tag(Route& route) {
        const std::size_t gt = in_.find('>', pos_);
        if (gt == std::string_view::npos) throw MalformedXml("unterminated closing tag");
        std::string name = trim(std::string(in_.substr(pos_ + 2, gt - pos_ - 2)));
        if (stack_.empty() || stack_.back() != name)
            throw MalformedXml("mismatched closing tag </" + name + ">");
        stack_.pop_back();
        pos_ = gt + 1;
        on_element_end(name, route);
    }

    void open_tag(Route& route) {
        const std::size_t gt = in_.find('>', pos_);
        if (gt == std::string_view::npos) throw MalformedXml("unterminated tag");
        std::string_view body = in_.substr(pos_ + 1, gt - pos_ - 1);
        bool self_closing = false;
        if (!body.empty() && body.back() == '/') {
            self_closing = true;
            body.remove_suffix(1);
        }
        std::size_t i = 0;
        while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i]))) ++i;
        std::string name(body.substr(0, i));
        if (name.empty()) throw MalformedXml("empty tag name");

        on_element_start(name, body.substr(i), route);
        if (self_closing) {
            on_element_end(name, route);
        } else {
            stack_.push_back(name);
        }
        pos_ = gt + 1;
    }

    void on_element_start(const std::string& name, std::string_view attrs, Route& route) {
        if (name == "trkpt") {
            if (in_trkpt_) throw MalformedXml("nested trkpt");
            in_trkpt_ = true;
            have_ele_ = false;
            TrackPoint pt;
            pt.lat = require_attr(attrs, "lat");
            pt.lon = require_attr(attrs, "lon");
            if (pt.lat < -90.0 || pt.lat > 90.0) throw MalformedXml("lat out of [-90,90]");
            if (pt.lon < -180.0 || pt.lon > 180.0) throw MalformedXml("lon out of [-180,180]");
            route.points.push_back(pt);
        } else if (in_trkpt_ && (name == "ele" || name == "time")) {
            capturing_ = true;
            text_.clear();
        }
    }

    void on_element_end(const std::string& name, Route& route) {
        if (name == "trkpt") {
            if (!have_ele_) throw MissingElevation(route.points.size() - 1);
            in_trkpt_ = false;
        } else if (in_trkpt_ && name == "ele") {
            capturing_ = false;
            double v = 0.0;
            if (!parse_double(decode_entities(trim(text_)), v) || !std::isfinite(v))
                throw MalformedXml("unparseable <ele> value");
            route.points.back().elevation_m = v;
            have_ele_ = true;
        } else if (in_trkpt_ && name == "time") {
            capturing_ = false;
            route.points.back().timestamp = parse_iso8601(trim(text_));
        }
    }

    static std::string trim(std::string s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    static bool parse_double(const std::string& s, double& out) {
        if (s.empty()) return false;
        char* end = nullptr;
        out = std::strtod(s.c_str(), &end);
        return end == s.c_str() + s.size();
    }

    static std::string decode_entities(const std::string& s) {
        std::string out;
        out.reserve(s.size());
        for (std::size_t i = 0; i < s.size();) {
            if (s[i] != '&') {
                out += s[i++];
                continue;
            }
            const std::size_t semi = s.find(';', i);
            if (semi == std::string::npos) throw MalformedXml("unterminated entity");
            const std::string ent = s.substr(i + 1, semi - i - 1);
            if (ent == "amp") out += '&';
            else if (ent == "lt") out += '<';
            else if (ent == "gt") out += '>';
            else if (ent == "quot") out += '"';
            else if (ent == "apos") out += '\'';
            else throw MalformedXml("unsupported entity &" + ent + ";");
            i = semi + 1;
        }
        return out;
    }

    double require_attr(std::string_view attrs, std::string_view key) const {
        std::size_t i = 0;
        while (i < attrs.size()) {
            while (i < attrs.size() && std::isspace(static_cast<unsigned char>(attrs[i]))) ++i;
            std::size_t name_start = i;
            while (i < attrs.size() && attrs[i] != '=' &&
                   !std::isspace(static_cast<unsigned char>(attrs[i])))
                ++i;
            std::string_view name = attrs.substr(name_start, i - name_start);
            while (i < attrs.size() && std::isspace(static_cast<unsigned char>(attrs[i]))) ++i;
            if (i >= attrs.size() || attrs[i] != '=') throw MalformedXml("attribute without value");
            ++i;
            while (i < attrs.size() && std::isspace(static_cast<unsigned char>(attrs[i]))) ++i;
            if (i >= attrs.size() || (attrs[i] != '"' && attrs[i] != '\''))
                throw MalformedXml("unquoted attribute value");
            const char quote = attrs[i++];
            const std::size_t val_start = i;
            while (i < attrs.size() && attrs[i] != quote) ++i;
            if (i >= attrs.size()) throw MalformedXml("unterminated attribute value");
            std::string_view value = attrs.substr(val_start, i - val_start);
            ++i;
            if (name == key) {
                double v = 0.0;
                if (!parse_double(std::string(value), v) || !std::isfinite(v))
                    throw MalformedXml("unparseable attribute " + std::string(key));
                return v;
            }
        }
        throw MalformedXml("trkpt missing attribute " + std::string(key));
    }

    // "YYYY-MM-DDThh:mm:ss[.frac][Z|+hh:mm|-hh:mm]". Anything else -> nullopt.
    static std::optional<double> parse_iso8601(const std::string& s) {
        int y, mo, d, h, mi;
        double sec;
        int consumed = 0;
        if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%lf%n", &y, &mo, &d, &h, &mi, &sec,
                        &consumed) != 6)
            return std::nullopt;
        double offset = 0.0;
        std::string rest = s.substr(static_cast<std::size_t>(consumed));
        if (rest == "Z" || rest.empty()) {
            offset = 0.0;
        } else if ((rest[0] == '+' || rest[0] == '-') && rest.size() == 6 && rest[3] == ':') {
            const int oh = std::atoi(rest.substr(1, 2).c_str());
            const int om = std::atoi(rest.substr(4, 2).c_str());
            offset = (rest[0] == '+' ? 1.0 : -1.0) * (oh * 3600.0 + om * 60.0);
        } else {
            return std::nullopt;
        }
        if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
        return days_from_civil(y, mo, d) * 86400.0 + h * 3600.0 + mi * 60.0 + sec - offset;
    }

    static std::int64_t days_from_civil(int y, int m, int d) {
        y -= m <= 2;
        const int era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                             static_cast<unsigned>(d) - 1u;
        const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
        return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
    }

    std::string_view in_;
    std::size_t pos_ = 0;
    std::vector<std::string> stack_;
    bool in_trkpt_ = false;
    bool have_ele_ = false;
    bool capturing_ = false;
    std::string text_;
};

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yy + (m <= 2));
}

std::string format_iso8601(double epoch_seconds) {
    const std::int64_t total = static_cast<std::int64_t>(std::floor(epoch_seconds));
    std::int64_t days = total / 86400;
    std::int64_t rem = total % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y, mo, d;
    civil_from_days(days, y, mo, d);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lldZ", y, mo, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem % 3600) / 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

} // namespace

Route parse_gpx(std::string_view bytes) { return GpxScanner(bytes).run(); }

std::string write_gpx(const Route& route) {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<gpx version=\"1.1\" creator=\"elevleak\">\n<trk>\n<trkseg>\n";
    char buf[160];
    for (const auto& pt : route.points) {
        std::snprintf(buf, sizeof(buf), "<trkpt lat=\"%.7f\" lon=\"%.7f\"><ele>%.6f</ele>",
                      pt.lat, pt.lon, pt.elevation_m);
        out += buf;
        if (pt.timestamp) out += "<time>" + format_iso8601(*pt.timestamp) + "</time>";
        out += "</trkpt>\n";
    }
    out += "</trkseg>\n</trk>\n</gpx>\n";
    return out;
}

Rect bounding_rect(const Route& route) {
    if (route.points.empty()) throw EmptyTrack();
    Rect r{{route.points[0].lat, route.points[0].lon},
           {route.points[0].lat, route.points[0].lon}};
    for (const auto& pt : route.points) {
        r.sw.lat = std::min(r.sw.lat, pt.lat);
        r.sw.lon = std::min(r.sw.lon, pt.lon);
        r.ne.lat = std::max(r.ne.lat, pt.lat);
        r.ne.lon = std::max(r.ne.lon, pt.lon);
    }
    return r;
}

double center_distance(const LatLon& a, const LatLon& b) {
    return std::hypot(a.lat - b.lat, a.lon - b.lon);
}

int assign_region(const Rect& rect, std::vector<Region>& regions, double threshold_deg) {
    if (!(threshold_deg > 0.0)) throw ValidationError("region threshold must be > 0");
    const LatLon c = rect.center();
    for (const auto& region : regions) {
        if (center_distance(c, region.center) <= threshold_deg) return region.id;
    }
    Region fresh;
    fresh.id = static_cast<int>(regions.size());
    fresh.center = c;
    regions.push_back(fresh);
    return fresh.id;
}

} // namespace elevleak::geodata
