//! Choosing successors by hand.

use std::io::{BufRead, Write};

use gp2_core::smallstep::{Chooser, ExtConfig, Successor};

/// Lists the successors on `prompt` and reads an index per line from
/// `input`. End of input aborts the run.
pub struct Prompter<R, W> {
    input: R,
    prompt: W,
}

impl<R: BufRead, W: Write> Prompter<R, W> {
    pub fn new(input: R, prompt: W) -> Self {
        Prompter { input, prompt }
    }

    fn ask(
        &mut self,
        current: &ExtConfig,
        options: &[Successor],
    ) -> std::io::Result<Option<usize>> {
        writeln!(self.prompt, "at {current}")?;
        for (i, (label, cfg)) in options.iter().enumerate() {
            writeln!(self.prompt, "  {i}: [{label}] {cfg}")?;
        }
        loop {
            write!(self.prompt, "choice [0-{}]> ", options.len() - 1)?;
            self.prompt.flush()?;
            let mut line = String::new();
            if self.input.read_line(&mut line)? == 0 {
                return Ok(None);
            }
            match line.trim().parse::<usize>() {
                Ok(i) if i < options.len() => return Ok(Some(i)),
                _ => writeln!(self.prompt, "expected a number below {}", options.len())?,
            }
        }
    }
}

impl<R: BufRead, W: Write> Chooser for Prompter<R, W> {
    fn choose(&mut self, current: &ExtConfig, options: &[Successor]) -> Option<usize> {
        self.ask(current, options).ok().flatten()
    }
}
