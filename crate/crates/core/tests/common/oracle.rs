//! Brute-force enumeration oracle for the texture and first-order
//! features. Written independently of the library implementation: pair
//! counting walks all ordered voxel pairs, runs come from explicit line
//! extraction, zones from union-find, and every feature formula is spelled
//! out directly from its definition.

use voxrad_core::features::GreyLevelVolume;

const DIRS: [[i64; 3]; 13] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 0],
    [1, -1, 0],
    [1, 0, 1],
    [1, 0, -1],
    [0, 1, 1],
    [0, 1, -1],
    [1, 1, 1],
    [1, 1, -1],
    [1, -1, 1],
    [1, -1, -1],
];

struct Grid<'a> {
    levels: &'a [u32],
    dims: [usize; 3],
}

impl<'a> Grid<'a> {
    fn level(&self, p: [i64; 3]) -> Option<u32> {
        if p[0] < 0
            || p[1] < 0
            || p[2] < 0
            || p[0] as usize >= self.dims[0]
            || p[1] as usize >= self.dims[1]
            || p[2] as usize >= self.dims[2]
        {
            return None;
        }
        let idx = (p[2] as usize * self.dims[1] + p[1] as usize) * self.dims[0] + p[0] as usize;
        Some(self.levels[idx])
    }

    fn roi_voxels(&self) -> Vec<[i64; 3]> {
        let mut out = Vec::new();
        for z in 0..self.dims[2] as i64 {
            for y in 0..self.dims[1] as i64 {
                for x in 0..self.dims[0] as i64 {
                    if self.level([x, y, z]).unwrap() > 0 {
                        out.push([x, y, z]);
                    }
                }
            }
        }
        out
    }
}

fn log2_or_zero(p: f64) -> f64 {
    if p > 0.0 {
        p.log2()
    } else {
        0.0
    }
}

// ---------------------------------------------------------------- GLCM --

fn glcm_from_pairs(grid: &Grid, dir: [i64; 3], ng: usize) -> Option<Vec<Vec<f64>>> {
    let voxels = grid.roi_voxels();
    let mut m = vec![vec![0f64; ng]; ng];
    let mut total = 0.0;
    // Every ordered pair of ROI voxels, matched against +dir and -dir.
    for a in &voxels {
        for b in &voxels {
            let delta = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            if delta == dir || delta == [-dir[0], -dir[1], -dir[2]] {
                let la = grid.level(*a).unwrap() as usize - 1;
                let lb = grid.level(*b).unwrap() as usize - 1;
                m[la][lb] += 1.0;
                total += 1.0;
            }
        }
    }
    if total == 0.0 {
        return None;
    }
    for row in m.iter_mut() {
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    Some(m)
}

fn glcm_features_of_matrix(p: &[Vec<f64>]) -> [f64; 24] {
    let ng = p.len();
    let px: Vec<f64> = (0..ng).map(|i| p[i].iter().sum()).collect();
    let n_present = px.iter().filter(|&&v| v > 0.0).count().max(1) as f64;
    let mu: f64 = (0..ng)
        .map(|i| (0..ng).map(|j| (i + 1) as f64 * p[i][j]).sum::<f64>())
        .sum();
    let sigma2: f64 = (0..ng)
        .map(|i| ((i + 1) as f64 - mu).powi(2) * px[i])
        .sum();

    let mut psum = vec![0f64; 2 * ng + 1];
    let mut pdiff = vec![0f64; ng];
    for i in 0..ng {
        for j in 0..ng {
            psum[i + j + 2] += p[i][j];
            pdiff[i.abs_diff(j)] += p[i][j];
        }
    }

    let autocorrelation: f64 = (0..ng)
        .map(|i| {
            (0..ng)
                .map(|j| (i + 1) as f64 * (j + 1) as f64 * p[i][j])
                .sum::<f64>()
        })
        .sum();
    let joint_average = mu;
    let moment = |power: i32| -> f64 {
        (0..ng)
            .map(|i| {
                (0..ng)
                    .map(|j| ((i + 1) as f64 + (j + 1) as f64 - 2.0 * mu).powi(power) * p[i][j])
                    .sum::<f64>()
            })
            .sum()
    };
    let cluster_prominence = moment(4);
    let cluster_shade = moment(3);
    let cluster_tendency = moment(2);
    let contrast: f64 = (0..ng)
        .map(|i| {
            (0..ng)
                .map(|j| ((i as f64) - (j as f64)).powi(2) * p[i][j])
                .sum::<f64>()
        })
        .sum();
    let correlation = if sigma2 > 0.0 {
        (autocorrelation - mu * mu) / sigma2
    } else {
        1.0
    };
    let difference_average: f64 = pdiff
        .iter()
        .enumerate()
        .map(|(k, &v)| k as f64 * v)
        .sum();
    let difference_entropy: f64 = -pdiff.iter().map(|&v| v * log2_or_zero(v)).sum::<f64>();
    let difference_variance: f64 = pdiff
        .iter()
        .enumerate()
        .map(|(k, &v)| (k as f64 - difference_average).powi(2) * v)
        .sum();
    let joint_energy: f64 = p.iter().flatten().map(|&v| v * v).sum();
    let joint_entropy: f64 = -p
        .iter()
        .flatten()
        .map(|&v| v * log2_or_zero(v))
        .sum::<f64>();
    let hx: f64 = -px.iter().map(|&v| v * log2_or_zero(v)).sum::<f64>();
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for i in 0..ng {
        for j in 0..ng {
            let indep = px[i] * px[j];
            if indep > 0.0 {
                hxy2 -= indep * indep.log2();
                if p[i][j] > 0.0 {
                    hxy1 -= p[i][j] * indep.log2();
                }
            }
        }
    }
    let imc1 = if hx > 0.0 {
        (joint_entropy - hxy1) / hx
    } else {
        0.0
    };
    let imc2_arg = 1.0 - (-2.0 * (hxy2 - joint_entropy)).exp();
    let imc2 = if imc2_arg > 0.0 { imc2_arg.sqrt() } else { 0.0 };
    let weighted = |f: &dyn Fn(f64) -> f64| -> f64 {
        (0..ng)
            .map(|i| {
                (0..ng)
                    .map(|j| f((i as f64) - (j as f64)) * p[i][j])
                    .sum::<f64>()
            })
            .sum()
    };
    let idm = weighted(&|d| 1.0 / (1.0 + d * d));
    let idmn = weighted(&|d| 1.0 / (1.0 + (d / n_present) * (d / n_present)));
    let id = weighted(&|d| 1.0 / (1.0 + d.abs()));
    let idn = weighted(&|d| 1.0 / (1.0 + d.abs() / n_present));
    let inverse_variance: f64 = (0..ng)
        .map(|i| {
            (0..ng)
                .filter(|&j| j != i)
                .map(|j| p[i][j] / ((i as f64) - (j as f64)).powi(2))
                .sum::<f64>()
        })
        .sum();
    let maximum_probability = p.iter().flatten().copied().fold(0.0, f64::max);
    let sum_average: f64 = psum.iter().enumerate().map(|(k, &v)| k as f64 * v).sum();
    let sum_entropy: f64 = -psum.iter().map(|&v| v * log2_or_zero(v)).sum::<f64>();
    let sum_squares: f64 = (0..ng)
        .map(|i| {
            (0..ng)
                .map(|j| ((i + 1) as f64 - mu).powi(2) * p[i][j])
                .sum::<f64>()
        })
        .sum();
    let sum_variance: f64 = psum
        .iter()
        .enumerate()
        .map(|(k, &v)| (k as f64 - sum_average).powi(2) * v)
        .sum();

    [
        autocorrelation,
        joint_average,
        cluster_prominence,
        cluster_shade,
        cluster_tendency,
        contrast,
        correlation,
        difference_average,
        difference_entropy,
        difference_variance,
        joint_energy,
        joint_entropy,
        imc1,
        imc2,
        idm,
        idmn,
        id,
        idn,
        inverse_variance,
        maximum_probability,
        sum_average,
        sum_entropy,
        sum_squares,
        sum_variance,
    ]
}

pub fn oracle_glcm(glv: &GreyLevelVolume) -> [f64; 24] {
    let grid = Grid {
        levels: &glv.levels,
        dims: glv.dims,
    };
    let ng = glv.ng as usize;
    let mut acc = [0f64; 24];
    let mut used = 0usize;
    for dir in DIRS {
        if let Some(m) = glcm_from_pairs(&grid, dir, ng) {
            let f = glcm_features_of_matrix(&m);
            for (a, v) in acc.iter_mut().zip(f.iter()) {
                *a += v;
            }
            used += 1;
        }
    }
    if used > 0 {
        for a in acc.iter_mut() {
            *a /= used as f64;
        }
    } else {
        acc[6] = 1.0;
        acc[10] = 1.0;
        acc[14] = 1.0;
        acc[15] = 1.0;
        acc[16] = 1.0;
        acc[17] = 1.0;
        acc[19] = 1.0;
    }
    acc
}

// --------------------------------------------------------------- GLRLM --

/// All maximal lines through the volume along `dir`, as level sequences
/// (0 = background breaks runs).
fn extract_lines(grid: &Grid, dir: [i64; 3]) -> Vec<Vec<u32>> {
    let mut lines = Vec::new();
    for z in 0..grid.dims[2] as i64 {
        for y in 0..grid.dims[1] as i64 {
            for x in 0..grid.dims[0] as i64 {
                let start = [x, y, z];
                // A line starts where stepping backwards exits the volume.
                let back = [x - dir[0], y - dir[1], z - dir[2]];
                if grid.level(back).is_some() {
                    continue;
                }
                let mut line = Vec::new();
                let mut p = start;
                while let Some(l) = grid.level(p) {
                    line.push(l);
                    p = [p[0] + dir[0], p[1] + dir[1], p[2] + dir[2]];
                }
                lines.push(line);
            }
        }
    }
    lines
}

fn rlm_features(matrix: &std::collections::HashMap<(u32, usize), f64>, n_roi: usize) -> [f64; 16] {
    let nr: f64 = matrix.values().sum();
    let entry = |f: &dyn Fn(f64, f64, f64) -> f64| -> f64 {
        matrix
            .iter()
            .map(|(&(g, l), &c)| f(g as f64, l as f64, c))
            .sum::<f64>()
    };
    let sre = entry(&|_, l, c| c / (l * l)) / nr;
    let lre = entry(&|_, l, c| c * l * l) / nr;
    let lglre = entry(&|g, _, c| c / (g * g)) / nr;
    let hglre = entry(&|g, _, c| c * g * g) / nr;
    let srlgle = entry(&|g, l, c| c / (g * g * l * l)) / nr;
    let srhgle = entry(&|g, l, c| c * g * g / (l * l)) / nr;
    let lrlgle = entry(&|g, l, c| c * l * l / (g * g)) / nr;
    let lrhgle = entry(&|g, l, c| c * g * g * l * l) / nr;
    let re = -entry(&|_, _, c| (c / nr) * log2_or_zero(c / nr));
    let mu_g = entry(&|g, _, c| g * c / nr);
    let mu_l = entry(&|_, l, c| l * c / nr);
    let glv = entry(&|g, _, c| (g - mu_g) * (g - mu_g) * c / nr);
    let rv = entry(&|_, l, c| (l - mu_l) * (l - mu_l) * c / nr);
    let mut by_level = std::collections::HashMap::new();
    let mut by_len = std::collections::HashMap::new();
    for (&(g, l), &c) in matrix {
        *by_level.entry(g).or_insert(0.0) += c;
        *by_len.entry(l).or_insert(0.0) += c;
    }
    let gln: f64 = by_level.values().map(|&c| c * c).sum();
    let rln: f64 = by_len.values().map(|&c| c * c).sum();
    [
        sre,
        lre,
        gln / nr,
        gln / (nr * nr),
        rln / nr,
        rln / (nr * nr),
        nr / n_roi as f64,
        glv,
        rv,
        re,
        lglre,
        hglre,
        srlgle,
        srhgle,
        lrlgle,
        lrhgle,
    ]
}

pub fn oracle_glrlm(glv: &GreyLevelVolume) -> [f64; 16] {
    let grid = Grid {
        levels: &glv.levels,
        dims: glv.dims,
    };
    let mut acc = [0f64; 16];
    let mut used = 0usize;
    for dir in DIRS {
        let mut matrix: std::collections::HashMap<(u32, usize), f64> =
            std::collections::HashMap::new();
        for line in extract_lines(&grid, dir) {
            // Split the line into maximal equal-level in-ROI segments.
            let mut i = 0;
            while i < line.len() {
                if line[i] == 0 {
                    i += 1;
                    continue;
                }
                let mut j = i;
                while j + 1 < line.len() && line[j + 1] == line[i] {
                    j += 1;
                }
                *matrix.entry((line[i], j - i + 1)).or_insert(0.0) += 1.0;
                i = j + 1;
            }
        }
        if !matrix.is_empty() {
            let f = rlm_features(&matrix, glv.n_roi);
            for (a, v) in acc.iter_mut().zip(f.iter()) {
                *a += v;
            }
            used += 1;
        }
    }
    if used > 0 {
        for a in acc.iter_mut() {
            *a /= used as f64;
        }
    }
    acc
}

// --------------------------------------------------------------- GLSZM --

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }
    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

pub fn oracle_glszm(glv: &GreyLevelVolume) -> [f64; 16] {
    let grid = Grid {
        levels: &glv.levels,
        dims: glv.dims,
    };
    let voxels = grid.roi_voxels();
    let mut uf = UnionFind::new(voxels.len());
    for (ai, a) in voxels.iter().enumerate() {
        for (bi, b) in voxels.iter().enumerate() {
            if ai >= bi {
                continue;
            }
            let adjacent = (a[0] - b[0]).abs() <= 1
                && (a[1] - b[1]).abs() <= 1
                && (a[2] - b[2]).abs() <= 1;
            if adjacent && grid.level(*a) == grid.level(*b) {
                uf.union(ai, bi);
            }
        }
    }
    let mut zones: std::collections::HashMap<usize, (u32, usize)> = std::collections::HashMap::new();
    for (i, v) in voxels.iter().enumerate() {
        let root = uf.find(i);
        let e = zones.entry(root).or_insert((grid.level(*v).unwrap(), 0));
        e.1 += 1;
    }
    let nz = zones.len() as f64;
    if nz == 0.0 {
        return [0.0; 16];
    }
    let np = glv.n_roi as f64;
    let list: Vec<(f64, f64)> = zones
        .values()
        .map(|&(g, s)| (g as f64, s as f64))
        .collect();
    let entry = |f: &dyn Fn(f64, f64) -> f64| -> f64 { list.iter().map(|&(g, s)| f(g, s)).sum() };
    let sae = entry(&|_, s| 1.0 / (s * s)) / nz;
    let lae = entry(&|_, s| s * s) / nz;
    let lglze = entry(&|g, _| 1.0 / (g * g)) / nz;
    let hglze = entry(&|g, _| g * g) / nz;
    let salgle = entry(&|g, s| 1.0 / (g * g * s * s)) / nz;
    let sahgle = entry(&|g, s| g * g / (s * s)) / nz;
    let lalgle = entry(&|g, s| s * s / (g * g)) / nz;
    let lahgle = entry(&|g, s| g * g * s * s) / nz;
    let mu_g = entry(&|g, _| g) / nz;
    let mu_s = entry(&|_, s| s) / nz;
    let glv_var = entry(&|g, _| (g - mu_g) * (g - mu_g)) / nz;
    let zv = entry(&|_, s| (s - mu_s) * (s - mu_s)) / nz;
    let mut by_level: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
    let mut by_size: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
    let mut by_cell: std::collections::HashMap<(u64, u64), f64> = std::collections::HashMap::new();
    for &(g, s) in &list {
        *by_level.entry(g as u64).or_insert(0.0) += 1.0;
        *by_size.entry(s as u64).or_insert(0.0) += 1.0;
        *by_cell.entry((g as u64, s as u64)).or_insert(0.0) += 1.0;
    }
    let gln: f64 = by_level.values().map(|&c| c * c).sum();
    let szn: f64 = by_size.values().map(|&c| c * c).sum();
    let ze: f64 = -by_cell
        .values()
        .map(|&c| (c / nz) * log2_or_zero(c / nz))
        .sum::<f64>();
    [
        sae,
        lae,
        gln / nz,
        gln / (nz * nz),
        szn / nz,
        szn / (nz * nz),
        nz / np,
        glv_var,
        zv,
        ze,
        lglze,
        hglze,
        salgle,
        sahgle,
        lalgle,
        lahgle,
    ]
}

// --------------------------------------------------------------- NGTDM --

pub fn oracle_ngtdm(glv: &GreyLevelVolume) -> [f64; 5] {
    let grid = Grid {
        levels: &glv.levels,
        dims: glv.dims,
    };
    let voxels = grid.roi_voxels();
    let ng = glv.ng as usize;
    let mut n = vec![0f64; ng + 1];
    let mut s = vec![0f64; ng + 1];
    for v in &voxels {
        let level = grid.level(*v).unwrap();
        n[level as usize] += 1.0;
        let mut neighbors = Vec::new();
        for dz in -1..=1i64 {
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    if (dx, dy, dz) == (0, 0, 0) {
                        continue;
                    }
                    if let Some(l) = grid.level([v[0] + dx, v[1] + dy, v[2] + dz]) {
                        if l > 0 {
                            neighbors.push(l as f64);
                        }
                    }
                }
            }
        }
        if !neighbors.is_empty() {
            let mean = neighbors.iter().sum::<f64>() / neighbors.len() as f64;
            s[level as usize] += (level as f64 - mean).abs();
        }
    }
    let nvp: f64 = n.iter().sum();
    let p: Vec<f64> = n.iter().map(|&c| c / nvp).collect();
    let present: Vec<usize> = (1..=ng).filter(|&i| p[i] > 0.0).collect();
    let ngp = present.len() as f64;
    let denom: f64 = present.iter().map(|&i| p[i] * s[i]).sum();
    let coarseness = if denom > 0.0 {
        (1.0 / denom).min(1e6)
    } else {
        1e6
    };
    let contrast = if ngp > 1.0 {
        let mut pairs = 0.0;
        for &i in &present {
            for &j in &present {
                pairs += p[i] * p[j] * ((i as f64) - (j as f64)).powi(2);
            }
        }
        pairs / (ngp * (ngp - 1.0)) * s.iter().sum::<f64>() / nvp
    } else {
        0.0
    };
    let busyness = {
        let mut abs_sum = 0.0;
        for &i in &present {
            for &j in &present {
                abs_sum += ((i as f64) * p[i] - (j as f64) * p[j]).abs();
            }
        }
        if abs_sum > 0.0 {
            denom / abs_sum
        } else {
            0.0
        }
    };
    let mut complexity = 0.0;
    for &i in &present {
        for &j in &present {
            complexity += ((i as f64) - (j as f64)).abs() * (p[i] * s[i] + p[j] * s[j])
                / (p[i] + p[j]);
        }
    }
    complexity /= nvp;
    let s_total: f64 = s.iter().sum();
    let strength = if s_total > 0.0 {
        let mut num = 0.0;
        for &i in &present {
            for &j in &present {
                num += (p[i] + p[j]) * ((i as f64) - (j as f64)).powi(2);
            }
        }
        num / s_total
    } else {
        0.0
    };
    [coarseness, contrast, busyness, complexity, strength]
}

// ----------------------------------------------------------------- FOS --

pub fn oracle_fos(values: &[f32], roi: &[u8], glv: &GreyLevelVolume) -> [f64; 19] {
    let x: Vec<f64> = values
        .iter()
        .zip(roi.iter())
        .filter(|(_, &m)| m != 0)
        .map(|(&v, _)| v as f64)
        .collect();
    let n = x.len() as f64;
    let mut sorted = x.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nearest_rank = |p: f64| -> f64 {
        let rank = ((p / 100.0 * n).ceil() as usize).clamp(1, sorted.len());
        sorted[rank - 1]
    };
    let energy: f64 = x.iter().map(|v| v * v).sum();
    let minimum = sorted[0];
    let maximum = sorted[sorted.len() - 1];
    let mean = x.iter().sum::<f64>() / n;
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
    };
    let p10 = nearest_rank(10.0);
    let p90 = nearest_rank(90.0);
    let variance = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let skewness = if variance > 0.0 {
        m3 / variance.powf(1.5)
    } else {
        0.0
    };
    let kurtosis = if variance > 0.0 { m4 / (variance * variance) } else { 0.0 };
    let mad = x.iter().map(|v| (v - mean).abs()).sum::<f64>() / n;
    let trimmed: Vec<f64> = x.iter().copied().filter(|&v| v >= p10 && v <= p90).collect();
    let rmad = if trimmed.is_empty() {
        0.0
    } else {
        let tm = trimmed.iter().sum::<f64>() / trimmed.len() as f64;
        trimmed.iter().map(|v| (v - tm).abs()).sum::<f64>() / trimmed.len() as f64
    };
    // Histogram features via direct counting of levels.
    let mut counts = std::collections::HashMap::new();
    for &l in glv.levels.iter().filter(|&&l| l > 0) {
        *counts.entry(l).or_insert(0f64) += 1.0;
    }
    let total: f64 = counts.values().sum();
    let entropy: f64 = -counts
        .values()
        .map(|&c| (c / total) * (c / total).log2())
        .sum::<f64>();
    let uniformity: f64 = counts.values().map(|&c| (c / total) * (c / total)).sum();
    [
        energy,
        energy, // total energy at 1 mm^3 voxels
        entropy,
        minimum,
        p10,
        p90,
        maximum,
        mean,
        median,
        nearest_rank(75.0) - nearest_rank(25.0),
        maximum - minimum,
        mad,
        rmad,
        (energy / n).sqrt(),
        variance.sqrt(),
        skewness,
        kurtosis,
        variance,
        uniformity,
    ]
}
