#include "gps/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gps::io {

namespace {

void write_header(std::ostream& os, const CommentHeader& header) {
  for (const auto& line : header) {
    os << "# " << line << '\n';
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("malformed number '" + s + "' in jobs.csv");
  }
  return v;
}

std::size_t parse_index(const std::string& s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("malformed index '" + s + "' in jobs.csv");
  }
  return v;
}

}  // namespace

std::string format_number(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_measure_csv(std::ostream& os, const AtomicMeasure& m, const CommentHeader& header) {
  write_header(os, header);
  os << "location,weight\n";
  for (const auto& a : m.atoms()) {
    os << format_number(a.location) << ',' << format_number(a.weight) << '\n';
  }
}

void write_jobs_csv(std::ostream& os, const Trace& trace, const CommentHeader& header) {
  write_header(os, header);
  os << "id,arrival,service,batch,departure,sojourn,wait\n";
  for (const auto& job : trace.jobs()) {
    os << job.id << ',' << format_number(job.arrival_time) << ',' << format_number(job.service_time) << ',';
    if (job.batch) {
      const double start = trace.batches()[*job.batch].start;
      os << *job.batch << ',' << format_number(*job.departure_time) << ','
         << format_number(*job.departure_time - job.arrival_time) << ',' << format_number(start - job.arrival_time);
    } else {
      os << ",,,";
    }
    os << '\n';
  }
}

void write_batches_csv(std::ostream& os, const Trace& trace, const CommentHeader& header) {
  write_header(os, header);
  os << "k,beta,work,completion,next_beta,size\n";
  for (const auto& b : trace.batches()) {
    os << b.index << ',' << format_number(b.start) << ',' << format_number(b.work) << ','
       << format_number(b.completion) << ','
       << (b.next_start.is_infinite() ? std::string("inf") : format_number(b.next_start.value())) << ',' << b.size
       << '\n';
  }
}

void write_snapshots_csv(std::ostream& os, const std::vector<SimState>& states, const CommentHeader& header) {
  write_header(os, header);
  os << "t,W,Z,sigma_mass,sigma_work,mu_mass,mu_work,batch_index,shift\n";
  for (const auto& s : states) {
    os << format_number(s.t) << ',' << format_number(s.workload) << ',' << format_number(s.queue_length) << ','
       << format_number(s.sigma.total_mass()) << ',' << format_number(s.sigma.first_moment()) << ','
       << format_number(s.mu.total_mass()) << ',' << format_number(s.mu.first_moment()) << ',' << s.batch_index
       << ',' << format_number(s.shift) << '\n';
  }
}

void write_fluid_csv(std::ostream& os, const FluidParams& p, const std::vector<double>& grid,
                     const std::vector<TestFunction>& probes, const CommentHeader& header) {
  write_header(os, header);
  os << "t,sigma_mass,sigma_work,mu_mass,mu_work,queue_length,residue,workload";
  for (const auto& f : probes) {
    os << ",sigma:" << f.tag();
  }
  for (const auto& f : probes) {
    os << ",mu:" << f.tag();
  }
  os << '\n';
  for (double t : grid) {
    const FluidState st = fluid_state(p, t);
    const double sm = total_mass(st.sigma);
    const double mm = total_mass(st.mu);
    os << format_number(t) << ',' << format_number(sm) << ',' << format_number(first_moment(st.sigma)) << ','
       << format_number(mm) << ',' << format_number(first_moment(st.mu)) << ',' << format_number(sm + mm) << ','
       << format_number(st.residue) << ',' << format_number(fluid_workload(p, t));
    for (const auto& f : probes) {
      os << ',' << format_number(integrate(st.sigma, f));
    }
    for (const auto& f : probes) {
      os << ',' << format_number(integrate(st.mu, f));
    }
    os << '\n';
  }
}

std::vector<JobRow> read_jobs_csv(std::istream& is) {
  std::vector<JobRow> rows;
  std::string line;
  bool seen_header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') {
      continue;
    }
    if (!seen_header) {
      if (line != "id,arrival,service,batch,departure,sojourn,wait") {
        throw std::runtime_error("unexpected jobs.csv header: " + line);
      }
      seen_header = true;
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != 7) {
      throw std::runtime_error("jobs.csv row has " + std::to_string(cells.size()) + " columns: " + line);
    }
    JobRow row;
    row.id = parse_index(cells[0]);
    row.arrival = parse_double(cells[1]);
    row.service = parse_double(cells[2]);
    if (!cells[3].empty()) {
      row.batch = parse_index(cells[3]);
      row.departure = parse_double(cells[4]);
    }
    rows.push_back(row);
  }
  if (!seen_header) {
    throw std::runtime_error("jobs.csv is missing its header");
  }
  return rows;
}

}  // namespace gps::io
