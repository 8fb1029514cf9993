use serde::Serialize;

use super::{best_bound, BoundResult, BoundsError};
use crate::model::Family;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub d: usize,
    pub bond: BoundResult,
    pub oriented_bond: BoundResult,
    pub site: BoundResult,
    pub oriented_site: BoundResult,
}

impl TableRow {
    /// Cells in column order: bond, oriented bond, site, oriented site.
    pub fn cells(&self) -> [&BoundResult; 4] {
        [&self.bond, &self.oriented_bond, &self.site, &self.oriented_site]
    }

    pub fn cell(&self, family: Family) -> &BoundResult {
        match family {
            Family::Bond => &self.bond,
            Family::OrientedBond => &self.oriented_bond,
            Family::Site => &self.site,
            Family::OrientedSite => &self.oriented_site,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BoundTable {
    pub rows: Vec<TableRow>,
}

impl BoundTable {
    /// `d,bond,oriented_bond,site,oriented_site` with four decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,bond,oriented_bond,site,oriented_site\n");
        for row in &self.rows {
            out.push_str(&row.d.to_string());
            for cell in row.cells() {
                out.push_str(&format!(",{:.4}", cell.rounded));
            }
            out.push('\n');
        }
        out
    }
}

pub const MAX_TABLE_DIMENSION: usize = 64;

pub fn generate_table(d_min: usize, d_max: usize) -> Result<BoundTable, BoundsError> {
    if d_min < 3 || d_min > d_max || d_max > MAX_TABLE_DIMENSION {
        return Err(BoundsError::InvalidRange { d_min, d_max });
    }
    let rows = (d_min..=d_max)
        .map(|d| {
            Ok(TableRow {
                d,
                bond: best_bound(Family::Bond, d)?,
                oriented_bond: best_bound(Family::OrientedBond, d)?,
                site: best_bound(Family::Site, d)?,
                oriented_site: best_bound(Family::OrientedSite, d)?,
            })
        })
        .collect::<Result<Vec<_>, BoundsError>>()?;
    Ok(BoundTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Selection;

    #[test]
    fn single_row_has_four_cells() {
        let t = generate_table(3, 3).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].cells().len(), 4);
    }

    #[test]
    fn oriented_site_d4_is_one_half() {
        let t = generate_table(3, 9).unwrap();
        assert_eq!(t.rows[1].oriented_site.rounded, 0.5);
    }

    #[test]
    fn invalid_ranges() {
        assert!(generate_table(2, 5).is_err());
        assert!(generate_table(6, 5).is_err());
        assert!(generate_table(3, MAX_TABLE_DIMENSION + 1).is_err());
    }

    #[test]
    fn csv_is_deterministic_and_four_decimal() {
        let a = generate_table(3, 12).unwrap();
        let b = generate_table(3, 12).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let csv = a.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 11);
        assert_eq!(lines[1], "3,0.3473,0.5680,0.5000,0.6422");
        assert!(a.rows[7..].iter().all(|r| r.cells().iter().all(|c| c.selection == Selection::MethodExtended)));
    }
}
