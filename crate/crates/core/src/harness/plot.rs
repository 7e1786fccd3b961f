/// A gnuplot script rendering relative error against iteration on a log
/// scale. `d0` is the initial distance used for normalisation.
pub fn gnuplot_script(trace_csv: &str, svg_out: &str, d0: f64) -> String {
    let d0 = if d0 > 0.0 { d0 } else { 1.0 };
    format!(
        "# run with: gnuplot plot.gp\n\
         set terminal svg size 800,500 dynamic\n\
         set output '{svg_out}'\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set logscale y\n\
         set format y '10^{{%L}}'\n\
         set xlabel 'iteration'\n\
         set ylabel 'relative error'\n\
         set grid\n\
         d0 = {d0:?}\n\
         plot '{trace_csv}' using 1:($3/d0) with lines lw 2 title 'gradient play'\n"
    )
}
