//! Escape-time rendering of J(F) in logarithmic coordinates or, through
//! z ↦ log z, in the plane. Output is binary PPM.

use anyhow::{bail, Context, Result};
use bouquet::tractmodel::trace::trace_hair;
use bouquet::tractmodel::{build_model, LogModel, ModelSpec};
use bouquet::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    /// Pixels are points z of the plane; iteration starts at log z.
    Plane,
    /// Pixels are points of the logarithmic coordinate plane.
    Log,
}

#[derive(Clone, Debug, Serialize)]
pub struct RenderConfig {
    pub model: ModelSpec,
    pub view: View,
    /// (x_min, x_max, y_min, y_max).
    pub bbox: (f64, f64, f64, f64),
    pub width: usize,
    pub height: usize,
    pub max_iter: usize,
    /// An orbit escapes once its real part (log coordinates) exceeds this.
    pub escape_radius: f64,
    pub palette: u32,
    /// Addresses whose hairs are drawn on top.
    pub hairs: Vec<String>,
    pub boundaries: bool,
    pub out: PathBuf,
}

impl RenderConfig {
    /// The canonical exp render: a = 1/4, plane view, 800×600, 128 iterations.
    pub fn canonical(out: PathBuf) -> Self {
        RenderConfig {
            model: ModelSpec::exp_default(),
            view: View::Plane,
            bbox: (-2.0, 8.0, -3.75, 3.75),
            width: 800,
            height: 600,
            max_iter: 128,
            escape_radius: 50.0,
            palette: 0,
            hairs: vec![],
            boundaries: false,
            out,
        }
    }

    /// Apply `key = value` overrides.
    pub fn apply(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        let num = |k: &str, v: &str| v.parse::<f64>().with_context(|| format!("{k} = {v}: not a number"));
        let int = |k: &str, v: &str| v.parse::<usize>().with_context(|| format!("{k} = {v}: not an integer"));
        let mut model_keys = BTreeMap::new();
        for (k, v) in map {
            match k.as_str() {
                "view" => {
                    self.view = match v.as_str() {
                        "plane" => View::Plane,
                        "log" => View::Log,
                        other => bail!("unknown view '{other}'"),
                    }
                }
                "x_min" => self.bbox.0 = num(k, v)?,
                "x_max" => self.bbox.1 = num(k, v)?,
                "y_min" => self.bbox.2 = num(k, v)?,
                "y_max" => self.bbox.3 = num(k, v)?,
                "width" => self.width = int(k, v)?,
                "height" => self.height = int(k, v)?,
                "max_iter" => self.max_iter = int(k, v)?,
                "escape_radius" => self.escape_radius = num(k, v)?,
                "palette" => self.palette = v.parse().with_context(|| format!("palette = {v}"))?,
                "hairs" => self.hairs = v.split(';').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
                "boundaries" => self.boundaries = v.parse().with_context(|| format!("boundaries = {v}"))?,
                "out" => self.out = PathBuf::from(v),
                _ => {
                    model_keys.insert(k.clone(), v.clone());
                }
            }
        }
        if !model_keys.is_empty() {
            model_keys.entry("model".into()).or_insert_with(|| self.model.name().to_string());
            self.model = ModelSpec::from_map(&model_keys)?;
        }
        Ok(())
    }

    pub fn validate(&self, model: &LogModel) -> Result<()> {
        let (x0, x1, y0, y1) = self.bbox;
        if self.width == 0 || self.height == 0 {
            bail!("image size {}x{} must be positive", self.width, self.height);
        }
        if !(x1 > x0 && y1 > y0) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            bail!("bounding box {:?} is empty or not finite", self.bbox);
        }
        if self.max_iter == 0 {
            bail!("max_iter must be positive");
        }
        if !(self.escape_radius > model.q) {
            bail!("escape radius {} must exceed Q = {}", self.escape_radius, model.q);
        }
        if self.palette as usize >= PALETTES.len() {
            bail!("palette {} does not exist (0..{})", self.palette, PALETTES.len());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RenderStats {
    pub width: usize,
    pub height: usize,
    pub escaping_fraction: f64,
    /// Pixels whose orbit leaves the tracts (Fatou set).
    pub leaving_fraction: f64,
    /// histogram[n] = pixels that escaped at iteration n.
    pub histogram: Vec<u64>,
    pub palette: u32,
    pub view: View,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fate {
    Escaped(usize),
    Left(usize),
    Bounded,
}

/// Banding colors for escaping pixels.
const PALETTES: [&[[u8; 3]]; 2] = [
    &[[255, 236, 179], [255, 183, 77], [239, 108, 0], [191, 54, 12], [121, 85, 72], [255, 241, 118]],
    &[[224, 224, 224], [160, 160, 160], [96, 96, 96]],
];

fn iterate(model: &LogModel, w: Complex64, max_iter: usize, radius: f64) -> Fate {
    let mut w = w;
    for n in 0..max_iter {
        if w.re > radius {
            return Fate::Escaped(n);
        }
        w = match model.forward(w) {
            Ok((v, _)) if v.re.is_finite() && v.im.is_finite() => v,
            Ok(_) | Err(bouquet::Error::NotRepresentable(_)) => return Fate::Escaped(n + 1),
            Err(_) => return Fate::Left(n),
        };
    }
    if w.re > radius {
        Fate::Escaped(max_iter)
    } else {
        Fate::Bounded
    }
}

fn color(fate: Fate, palette: u32) -> [u8; 3] {
    match fate {
        Fate::Escaped(n) => {
            let p = PALETTES[palette as usize];
            p[n % p.len()]
        }
        Fate::Left(n) => {
            let g = (12 + 6 * n.min(12)) as u8;
            [g / 2, g / 2, g]
        }
        Fate::Bounded => [0, 0, 0],
    }
}

pub struct Image {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Image {
    pub fn ppm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }
}

/// Pixel (i, j) center in the view's coordinates.
fn pixel_point(cfg: &RenderConfig, i: usize, j: usize) -> Complex64 {
    let (x0, x1, y0, y1) = cfg.bbox;
    let x = x0 + (i as f64 + 0.5) * (x1 - x0) / cfg.width as f64;
    let y = y1 - (j as f64 + 0.5) * (y1 - y0) / cfg.height as f64;
    Complex64::new(x, y)
}

fn to_log(cfg: &RenderConfig, z: Complex64) -> Option<Complex64> {
    match cfg.view {
        View::Log => Some(z),
        View::Plane if z.norm() > 0.0 => Some(z.ln()),
        View::Plane => None,
    }
}

fn to_pixel(cfg: &RenderConfig, w: Complex64) -> Option<(usize, usize)> {
    let z = match cfg.view {
        View::Log => w,
        View::Plane => w.exp(),
    };
    let (x0, x1, y0, y1) = cfg.bbox;
    let fi = (z.re - x0) / (x1 - x0) * cfg.width as f64;
    let fj = (y1 - z.im) / (y1 - y0) * cfg.height as f64;
    (fi >= 0.0 && fj >= 0.0 && fi < cfg.width as f64 && fj < cfg.height as f64).then(|| (fi as usize, fj as usize))
}

/// Render into memory. Rows are computed in parallel and assembled in order.
pub fn render_image(cfg: &RenderConfig, model: &LogModel) -> Result<(Image, RenderStats)> {
    cfg.validate(model)?;
    let fates: Vec<Fate> = (0..cfg.height)
        .into_par_iter()
        .flat_map_iter(|j| {
            (0..cfg.width).map(move |i| match to_log(cfg, pixel_point(cfg, i, j)) {
                Some(w) => iterate(model, w, cfg.max_iter, cfg.escape_radius),
                None => Fate::Bounded,
            })
        })
        .collect();
    let mut rgb: Vec<u8> = fates.iter().flat_map(|f| color(*f, cfg.palette)).collect();
    let mut histogram = vec![0u64; cfg.max_iter + 1];
    let (mut escaped, mut left) = (0usize, 0usize);
    for f in &fates {
        match f {
            Fate::Escaped(n) => {
                escaped += 1;
                histogram[*n] += 1;
            }
            Fate::Left(_) => left += 1,
            Fate::Bounded => {}
        }
    }
    if cfg.boundaries {
        let inside: Vec<bool> = (0..cfg.height)
            .into_par_iter()
            .flat_map_iter(|j| {
                (0..cfg.width).map(move |i| to_log(cfg, pixel_point(cfg, i, j)).map_or(false, |w| model.locate(w).is_ok()))
            })
            .collect();
        for j in 0..cfg.height {
            for i in 0..cfg.width {
                let k = j * cfg.width + i;
                let edge = (i + 1 < cfg.width && inside[k] != inside[k + 1])
                    || (j + 1 < cfg.height && inside[k] != inside[k + cfg.width]);
                if edge {
                    rgb[3 * k..3 * k + 3].copy_from_slice(&[80, 200, 255]);
                }
            }
        }
    }
    for text in &cfg.hairs {
        let address = model.parse_address(text)?;
        let potentials: Vec<f64> = (0..400).map(|k| model.base_point + 0.05 * k as f64).collect();
        let hair = trace_hair(model, &address, &potentials, 40)?;
        for s in &hair.samples {
            if let Some((i, j)) = to_pixel(cfg, s.z) {
                let k = j * cfg.width + i;
                rgb[3 * k..3 * k + 3].copy_from_slice(&[255, 255, 255]);
            }
        }
    }
    let total = (cfg.width * cfg.height) as f64;
    let stats = RenderStats {
        width: cfg.width,
        height: cfg.height,
        escaping_fraction: escaped as f64 / total,
        leaving_fraction: left as f64 / total,
        histogram,
        palette: cfg.palette,
        view: cfg.view,
    };
    Ok((Image { width: cfg.width, height: cfg.height, rgb }, stats))
}

/// Build the model, render, and write the PPM file.
pub fn render(cfg: &RenderConfig) -> Result<RenderStats> {
    let model = build_model(&cfg.model)?;
    let (img, stats) = render_image(cfg, &model)?;
    let mut f = std::fs::File::create(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    f.write_all(&img.ppm_bytes())?;
    Ok(stats)
}

/// Run `f` on a pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(f))
}
