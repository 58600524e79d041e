//! Explicit Runge-Kutta steppers over a [`VectorField`].

use crate::field::VectorField;

/// One classical fourth-order Runge-Kutta step from `u` with step `h`.
pub fn rk4_step<F: VectorField + ?Sized>(field: &F, u: &[f64], h: f64, out: &mut [f64]) {
    let d = u.len();
    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let mut tmp = vec![0.0; d];

    field.eval(u, &mut k1);
    axpy_into(u, 0.5 * h, &k1, &mut tmp);
    field.eval(&tmp, &mut k2);
    axpy_into(u, 0.5 * h, &k2, &mut tmp);
    field.eval(&tmp, &mut k3);
    axpy_into(u, h, &k3, &mut tmp);
    field.eval(&tmp, &mut k4);

    for i in 0..d {
        out[i] = u[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

#[inline]
fn axpy_into(u: &[f64], a: f64, k: &[f64], out: &mut [f64]) {
    for ((o, ui), ki) in out.iter_mut().zip(u).zip(k) {
        *o = ui + a * ki;
    }
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order weights minus the embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Dormand-Prince 5(4) stepper with first-same-as-last reuse of the final stage.
pub(crate) struct DormandPrince {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    fsal_valid: bool,
}

impl DormandPrince {
    pub(crate) fn new(dim: usize) -> Self {
        DormandPrince {
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            fsal_valid: false,
        }
    }

    /// Attempts a step of size `h`, writing the fifth-order solution to `out`.
    /// Returns the scaled RMS error estimate; `<= 1` means acceptable.
    pub(crate) fn try_step<F: VectorField + ?Sized>(
        &mut self,
        field: &F,
        u: &[f64],
        h: f64,
        rtol: f64,
        atol: f64,
        out: &mut [f64],
    ) -> f64 {
        let d = u.len();
        if !self.fsal_valid {
            field.eval(u, &mut self.k[0]);
            self.fsal_valid = true;
        }
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;
        for i in 0..d {
            tmp[i] = u[i] + h * A21 * k1[i];
        }
        field.eval(tmp, k2);
        for i in 0..d {
            tmp[i] = u[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        field.eval(tmp, k3);
        for i in 0..d {
            tmp[i] = u[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        field.eval(tmp, k4);
        for i in 0..d {
            tmp[i] = u[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        field.eval(tmp, k5);
        for i in 0..d {
            tmp[i] =
                u[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        field.eval(tmp, k6);
        for i in 0..d {
            out[i] = u[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        field.eval(out, k7);

        let mut acc = 0.0;
        for i in 0..d {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = atol + rtol * u[i].abs().max(out[i].abs());
            acc += (e / scale) * (e / scale);
        }
        (acc / d as f64).sqrt()
    }

    /// Promotes the last stage to the first stage of the next step. A rejected
    /// step needs no call: the first stage still belongs to the start point.
    pub(crate) fn accept(&mut self) {
        self.k.swap(0, 6);
    }
}
