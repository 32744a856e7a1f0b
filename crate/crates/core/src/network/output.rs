use std::fmt::Write as _;
use std::io::{self, Write};

use super::{LogLine, TraceRow};
use crate::routing::LinkGraph;

pub const TRACE_HEADER: &str =
    "time_s,uav_id,x_m,y_m,z_m,state,cx_m,cy_m,r_m,heading_rad,speed_mps";
pub const SNAPSHOT_HEADER: &str = "t_s,node_a,node_b,llt_s";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_event_log<W: Write>(mut w: W, events: &[LogLine]) -> io::Result<()> {
    for line in events {
        serde_json::to_writer(&mut w, line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_trace_csv<W: Write>(mut w: W, rows: &[TraceRow]) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    let mut line = String::new();
    for r in rows {
        line.clear();
        let _ = write!(
            line,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.time,
            r.uav,
            r.position.x,
            r.position.y,
            r.position.z,
            r.state,
            opt(r.center.map(|c| c.0)),
            opt(r.center.map(|c| c.1)),
            opt(r.radius),
            opt(r.heading),
            r.speed
        );
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// All snapshots in one edge list, ordered by time then node pair.
pub fn write_snapshots_csv<W: Write>(mut w: W, snapshots: &[LinkGraph<u32>]) -> io::Result<()> {
    writeln!(w, "{SNAPSHOT_HEADER}")?;
    for g in snapshots {
        for (a, b, llt) in g.edges() {
            writeln!(w, "{},{},{},{}", g.snapshot_time, a, b, llt)?;
        }
    }
    Ok(())
}
