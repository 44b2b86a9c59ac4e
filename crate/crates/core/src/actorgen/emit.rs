use std::fmt::Write as _;

use super::{ActorModelIr, TempEffect};

fn assigns(ir: &ActorModelIr, temps: &std::collections::BTreeSet<usize>) -> String {
    temps.iter().map(|&t| format!("{}=true;", ir.temps[t].ident)).collect()
}

/// Renders the IR as Rebeca source with three-space indentation. Output is a
/// pure function of the IR.
pub fn emit_rebeca(ir: &ActorModelIr) -> String {
    let cap = ir.queue_capacity;
    let mut s = String::new();
    let w = &mut s;

    let _ = writeln!(w, "reactiveclass Environment({cap}) {{");
    let _ = writeln!(w, "   statevars {{");
    for t in &ir.temps {
        let _ = writeln!(w, "      boolean {};", t.ident);
    }
    let _ = writeln!(w, "   }}");
    let _ = writeln!(w, "   knownrebecs {{");
    let _ = writeln!(w, "      System system;");
    let _ = writeln!(w, "   }}");
    let _ = writeln!(w, "   Environment(){{");
    let _ = writeln!(w, "      self.req();");
    let _ = writeln!(w, "   }}");
    let _ = writeln!(w, "   msgsrv req() {{");
    for t in &ir.temps {
        let _ = writeln!(w, "      {}=false;", t.ident);
    }
    let cases: Vec<String> = (0..ir.inputs.len()).map(|i| i.to_string()).collect();
    let _ = writeln!(w, "      int data = ?({});", cases.join(","));
    let _ = writeln!(w, "      switch(data) {{");
    for (i, input) in ir.inputs.iter().enumerate() {
        let _ = writeln!(w, "         case {i}: system.{}(); break;", input.ident);
    }
    let _ = writeln!(w, "      }}");
    let _ = writeln!(w, "   }}");
    for h in &ir.output_handlers {
        let ident = &ir.outputs[h.output].ident;
        match &h.temps {
            TempEffect::Uniform(set) => {
                let _ = writeln!(w, "   msgsrv {ident}(){{");
                for &t in set {
                    let _ = writeln!(w, "      {}=true;", ir.temps[t].ident);
                }
            }
            TempEffect::ByCase(by_case) => {
                let _ = writeln!(w, "   msgsrv {ident}(int data){{");
                let _ = writeln!(w, "      switch(data) {{");
                for (case, set) in by_case {
                    let _ = writeln!(w, "         case {case}: {}break;", assigns(ir, set));
                }
                let _ = writeln!(w, "      }}");
            }
        }
        let _ = writeln!(w, "      self.req();");
        let _ = writeln!(w, "   }}");
    }
    if let Some(t) = &ir.timeout {
        let _ = writeln!(w, "   msgsrv timeout(){{");
        let _ = writeln!(w, "      {}=true;", ir.temps[t.temp].ident);
        let _ = writeln!(w, "      self.req();");
        let _ = writeln!(w, "   }}");
    }
    let _ = writeln!(w, "}}");

    let _ = writeln!(w, "reactiveclass System({cap}) {{");
    let _ = writeln!(w, "   statevars {{");
    let _ = writeln!(w, "      int state;");
    for p in &ir.props {
        let _ = writeln!(w, "      boolean {};", p.ident);
    }
    let _ = writeln!(w, "   }}");
    let _ = writeln!(w, "   knownrebecs {{");
    let _ = writeln!(w, "      Environment environment;");
    let _ = writeln!(w, "   }}");
    if !ir.initial_props.is_empty() {
        let _ = writeln!(w, "   System(){{");
        for &p in &ir.initial_props {
            let _ = writeln!(w, "      {}=true;", ir.props[p].ident);
        }
        let _ = writeln!(w, "   }}");
    }
    for h in &ir.handlers {
        let _ = writeln!(w, "   msgsrv {}(){{", ir.inputs[h.input].ident);
        let mut first = true;
        if ir.timeout.is_some() {
            let _ = writeln!(w, "      int tm = ?(0,1);");
            let _ = writeln!(w, "      if(tm==1) {{");
            let _ = writeln!(w, "         state=0;");
            for (k, p) in ir.props.iter().enumerate() {
                let _ = writeln!(w, "         {}={};", p.ident, ir.initial_props.contains(&k));
            }
            let _ = writeln!(w, "         environment.timeout();");
            first = false;
        }
        for b in &h.branches {
            if first {
                let _ = writeln!(w, "      if(state=={}) {{", b.state);
                first = false;
            } else {
                let _ = writeln!(w, "      }} else");
                let _ = writeln!(w, "      if(state=={}) {{", b.state);
            }
            let _ = writeln!(w, "         state={};", b.next);
            for &(p, v) in &b.effects {
                let _ = writeln!(w, "         {}={v};", ir.props[p].ident);
            }
            let out = ir.output_handler(b.output).expect("handler for every used output");
            let arg = if out.temps.takes_case() { h.input.to_string() } else { String::new() };
            let _ = writeln!(w, "         environment.{}({arg});", ir.outputs[b.output].ident);
        }
        if !first {
            let _ = writeln!(w, "      }}");
        }
        let _ = writeln!(w, "   }}");
    }
    let _ = writeln!(w, "}}");
    let _ = writeln!(w, "main {{");
    let _ = writeln!(w, "   Environment environment(system):();");
    let _ = writeln!(w, "   System  system(environment):();");
    let _ = writeln!(w, "}}");
    s
}
