//! Minimal PNG charts. There is no text rendering; axes run over the data
//! ranges recorded next to each image in the JSON report.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::EvalError;

const WIDTH: u32 = 640;
const HEIGHT: u32 = 480;
const MARGIN: f64 = 40.0;
const BACKGROUND: Rgb<u8> = Rgb([255, 255, 255]);
const AXIS: Rgb<u8> = Rgb([40, 40, 40]);
const GRID: Rgb<u8> = Rgb([225, 225, 225]);
pub const PALETTE: [Rgb<u8>; 4] = [Rgb([31, 119, 180]), Rgb([214, 39, 40]), Rgb([44, 160, 44]), Rgb([148, 103, 189])];

/// Maps data coordinates into the plotting area.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            }
        };
        let (x0, x1) = span(&mut xs.clone());
        let (y0, y1) = span(&mut ys.clone());
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let w = f64::from(WIDTH) - 2.0 * MARGIN;
        let h = f64::from(HEIGHT) - 2.0 * MARGIN;
        (
            MARGIN + (x - self.x0) / (self.x1 - self.x0) * w,
            f64::from(HEIGHT) - MARGIN - (y - self.y0) / (self.y1 - self.y0) * h,
        )
    }
}

fn put(img: &mut RgbImage, x: f64, y: f64, c: Rgb<u8>) {
    if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn disc(img: &mut RgbImage, x: f64, y: f64, r: f64, c: Rgb<u8>) {
    let ri = r.ceil() as i64;
    for dy in -ri..=ri {
        for dx in -ri..=ri {
            if (dx * dx + dy * dy) as f64 <= r * r {
                put(img, x + dx as f64, y + dy as f64, c);
            }
        }
    }
}

fn line(img: &mut RgbImage, (ax, ay): (f64, f64), (bx, by): (f64, f64), width: f64, c: Rgb<u8>) {
    let n = ((bx - ax).abs().max((by - ay).abs()).ceil() as usize).max(1);
    for i in 0..=n {
        let t = i as f64 / n as f64;
        disc(img, ax + t * (bx - ax), ay + t * (by - ay), width / 2.0, c);
    }
}

fn axes(img: &mut RgbImage, frame: &Frame) {
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let x = frame.x0 + t * (frame.x1 - frame.x0);
        let y = frame.y0 + t * (frame.y1 - frame.y0);
        line(img, frame.px(x, frame.y0), frame.px(x, frame.y1), 1.0, GRID);
        line(img, frame.px(frame.x0, y), frame.px(frame.x1, y), 1.0, GRID);
    }
    line(img, frame.px(frame.x0, frame.y0), frame.px(frame.x1, frame.y0), 2.0, AXIS);
    line(img, frame.px(frame.x0, frame.y0), frame.px(frame.x0, frame.y1), 2.0, AXIS);
}

fn save(img: &RgbImage, path: &Path) -> Result<(), EvalError> {
    img.save(path).map_err(|e| EvalError::Plot(format!("{}: {e}", path.display())))
}

/// Polylines, one colour per series in palette order.
pub fn line_chart(path: &Path, series: &[(&[f64], &[f64])]) -> Result<(), EvalError> {
    let frame = Frame::new(
        series.iter().flat_map(|s| s.0.iter().copied()),
        series.iter().flat_map(|s| s.1.iter().copied()).chain([0.0]),
    );
    let mut img = RgbImage::from_pixel(WIDTH, HEIGHT, BACKGROUND);
    axes(&mut img, &frame);
    for (k, (xs, ys)) in series.iter().enumerate() {
        let c = PALETTE[k % PALETTE.len()];
        let pts: Vec<_> = xs.iter().zip(ys.iter()).map(|(&x, &y)| frame.px(x, y)).collect();
        for w in pts.windows(2) {
            line(&mut img, w[0], w[1], 2.5, c);
        }
        for &p in &pts {
            disc(&mut img, p.0, p.1, 3.5, c);
        }
    }
    save(&img, path)
}

/// Points coloured by class index.
pub fn scatter(path: &Path, points: &[(f64, f64, usize)]) -> Result<(), EvalError> {
    let frame = Frame::new(points.iter().map(|p| p.0), points.iter().map(|p| p.1));
    let mut img = RgbImage::from_pixel(WIDTH, HEIGHT, BACKGROUND);
    axes(&mut img, &frame);
    for &(x, y, class) in points {
        let (px, py) = frame.px(x, y);
        disc(&mut img, px, py, 3.0, PALETTE[class % PALETTE.len()]);
    }
    save(&img, path)
}

/// Diverging blue-white-red map scaled to the largest magnitude; absent
/// cells are grey. One row of cells per entry of `rows`, drawn as columns
/// so that the component axis runs horizontally.
pub fn heatmap(path: &Path, rows: &[Vec<Option<f64>>]) -> Result<(), EvalError> {
    let n_cols = rows.len().max(1);
    let n_rows = rows.iter().map(Vec::len).max().unwrap_or(1).max(1);
    let scale = rows.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let mut img = RgbImage::from_pixel(WIDTH, HEIGHT, BACKGROUND);
    let cw = (f64::from(WIDTH) - 2.0 * MARGIN) / n_cols as f64;
    let ch = (f64::from(HEIGHT) - 2.0 * MARGIN) / n_rows as f64;
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let c = match v {
                None => Rgb([170, 170, 170]),
                Some(v) => {
                    let t = (v / scale).clamp(-1.0, 1.0);
                    let fade = |x: f64| (255.0 * (1.0 - x.abs())) as u8;
                    if t >= 0.0 {
                        Rgb([255, fade(t), fade(t)])
                    } else {
                        Rgb([fade(t), fade(t), 255])
                    }
                }
            };
            let (x0, y0) = (MARGIN + i as f64 * cw, MARGIN + j as f64 * ch);
            for y in y0 as u32..(y0 + ch) as u32 {
                for x in x0 as u32..(x0 + cw) as u32 {
                    put(&mut img, f64::from(x), f64::from(y), c);
                }
            }
        }
    }
    save(&img, path)
}
