//! The `exact-table` command: closed-form and asymptotic kernel values on a
//! parity-respecting `(kind, t, j)` grid.

use crate::csvio::{float, int, CsvBuilder, CsvCell};
use harness::correlations::{CorrelationKind, CorrelationQuery};
use harness::estimators::{CorrelationTable, TableRow};
use harness::Result;

/// All valid rows with `t <= t_max`, `|j| <= j_max`.
pub fn exact_table(t_max: u64, j_max: i64) -> Result<CorrelationTable> {
    let mut table = CorrelationTable::default();
    for kind in CorrelationKind::ALL {
        for t in kind.min_rounds()..=t_max {
            for j in -j_max..=j_max {
                if !kind.offset_is_valid(j) {
                    continue;
                }
                let query = CorrelationQuery::new(kind, t, j)?;
                let exact = query.exact()?;
                // the asymptotic forms start at t = 1
                let asymptotic = if t >= 1 { Some(query.asymptotic()?) } else { None };
                table.rows.push(TableRow {
                    kind,
                    t,
                    j,
                    exact: Some(exact),
                    asymptotic,
                    empirical: None,
                    stderr: None,
                });
            }
        }
    }
    Ok(table)
}

pub fn render_csv(table: &CorrelationTable, t_max: u64, j_max: i64) -> String {
    let mut b = CsvBuilder::new();
    b.meta("table", "closed-form and asymptotic correlation kernels")
        .meta("t-max", t_max)
        .meta("j-max", j_max)
        .meta("version", env!("CARGO_PKG_VERSION"))
        .header(&["kind", "t", "j", "exact", "asymptotic"]);
    for row in &table.rows {
        let asym: CsvCell = match row.asymptotic {
            Some(a) => float(a),
            None => CsvCell::Str(""),
        };
        b.row(&[
            CsvCell::Str(row.kind.label()),
            int(row.t as i64),
            int(row.j),
            float(row.exact.unwrap()),
            asym,
        ]);
    }
    b.finish()
}
